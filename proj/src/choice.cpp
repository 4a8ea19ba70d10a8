#include "portsim/choice.hpp"

#include <algorithm>
#include <cmath>

#include "portsim/kernels.hpp"

namespace portsim {

void UtilityParams::validate() const {
  if (!(beta >= 0) || !std::isfinite(beta)) throw ConfigError("beta must be >= 0");
  if (!(tau > 0 && tau < 1)) throw ConfigError("tau must lie in (0, 1)");
  if (!(softmax_temperature > 0) || !std::isfinite(softmax_temperature))
    throw ConfigError("softmax_temperature must be > 0");
}

double item_utility(std::span<const double> features, std::span<const double> preferences) {
  const auto nnz = std::count_if(features.begin(), features.end(), [](double x) { return x != 0.0; });
  if (nnz == 0) throw ContractViolation("item has an empty feature vector");
  return kernels::dot(features, preferences) / static_cast<double>(nnz);
}

std::vector<double> selection_probabilities(std::span<const double> utilities, double temperature) {
  if (utilities.empty()) throw ContractViolation("softmax over an empty slate");
  const double top = *std::max_element(utilities.begin(), utilities.end());
  std::vector<double> p(utilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((utilities[i] - top) / temperature);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

std::size_t select_index(std::span<const double> probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  // Rounding can leave acc a hair below 1; fall to the last positive entry.
  for (std::size_t i = probabilities.size(); i-- > 0;)
    if (probabilities[i] > 0) return i;
  return probabilities.size() - 1;
}

double slate_utility(std::span<const double> item_utilities) {
  if (item_utilities.empty()) throw ContractViolation("utility of an empty slate");
  double s = 0.0;
  for (double u : item_utilities) s += u;
  return s / static_cast<double>(item_utilities.size());
}

double update_running_utility(double previous, double current, double beta) {
  return (previous * beta + current) / (1.0 + beta);
}

std::optional<RecommenderId> switch_decision(const ConsumerState& consumer, std::span<const RecommenderId> active,
                                             double tau) {
  const double own = consumer.utility_estimates.at(consumer.attached);
  if (!(own < tau)) return std::nullopt;
  std::optional<RecommenderId> best;
  for (RecommenderId k : active) {
    if (k == consumer.attached) continue;
    const double est = consumer.utility_estimates.at(k);
    if (est < own) continue;
    if (!best || est > consumer.utility_estimates.at(*best) ||
        (est == consumer.utility_estimates.at(*best) && k < *best))
      best = k;
  }
  return best;
}

void update_provider_utility(std::vector<ProviderState>& providers, ProviderIndex provider, std::uint32_t cycle) {
  if (provider >= providers.size()) throw ContractViolation("click on an item without a known provider");
  if (cycle == 0) throw ContractViolation("cycles are 1-based");
  auto& counts = providers[provider].clicks_per_cycle;
  if (counts.size() < cycle) counts.resize(cycle, 0);
  ++counts[cycle - 1];
}

}  // namespace portsim

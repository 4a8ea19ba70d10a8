#pragma once

// Consumer-side behavior: utilities, the softmax choice model, the
// recency-weighted running utility and the threshold switching rule.

#include <optional>
#include <span>
#include <vector>

#include "portsim/common.hpp"
#include "portsim/ecosystem.hpp"
#include "portsim/rng.hpp"

namespace portsim {

struct UtilityParams {
  double beta = 2.0;                 // recency bias of the running estimate
  double tau = 0.2;                  // switch threshold
  double softmax_temperature = 1.0;

  /// Throws ConfigError when out of range.
  void validate() const;
};

/// (f . p) / nnz(f). Throws ContractViolation for an all-zero feature vector.
double item_utility(std::span<const double> features, std::span<const double> preferences);

/// Numerically stable softmax of utilities / temperature.
std::vector<double> selection_probabilities(std::span<const double> utilities, double temperature);

/// Index drawn from a categorical distribution.
std::size_t select_index(std::span<const double> probabilities, Rng& rng);

/// Mean of per-item utilities. Empty input is a contract violation; the
/// engine skips empty-slate days before reaching this point.
double slate_utility(std::span<const double> item_utilities);

/// (prev * beta + current) / (1 + beta).
double update_running_utility(double previous, double current, double beta);

/// Target recommender when the attached estimate is below tau and another
/// active recommender's estimate is at least as high. Among qualifying
/// alternatives, the highest estimate wins; ties go to the lower id.
std::optional<RecommenderId> switch_decision(const ConsumerState& consumer, std::span<const RecommenderId> active,
                                             double tau);

/// Adds one click to the provider's count for the given 1-based cycle.
void update_provider_utility(std::vector<ProviderState>& providers, ProviderIndex provider, std::uint32_t cycle);

}  // namespace portsim

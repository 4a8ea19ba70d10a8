#include <algorithm>
#include <numeric>
#include <string>

#include "portsim/kernels.hpp"
#include "portsim/recommenders.hpp"

namespace portsim {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ALS: return "als";
    case Algorithm::BPR: return "bpr";
    case Algorithm::ItemKNN: return "itemknn";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "als" || s == "ALS") return Algorithm::ALS;
  if (s == "bpr" || s == "BPR") return Algorithm::BPR;
  if (s == "itemknn" || s == "ItemKNN" || s == "knn") return Algorithm::ItemKNN;
  throw ConfigError("unknown algorithm '" + std::string(s) + "' (expected als, bpr or itemknn)");
}

std::string_view to_string(SlotSource s) {
  switch (s) {
    case SlotSource::Ranked: return "ranked";
    case SlotSource::PopularitySample: return "popularity";
    case SlotSource::Fallback: return "fallback";
  }
  return "unknown";
}

ItemIndex popularity_sample(std::span<const ItemIndex> items, std::span<const double> weights,
                            std::span<const char> excluded, Rng& rng) {
  if (items.size() != weights.size()) throw ContractViolation("popularity weights must align with items");
  auto is_excluded = [&](ItemIndex i) { return !excluded.empty() && excluded[i]; };
  double total = 0.0;
  std::size_t available = 0;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (is_excluded(items[k])) continue;
    ++available;
    total += weights[k];
  }
  if (available == 0) throw EmptySlateError("no item left to sample");

  if (total > 0.0) {
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::optional<ItemIndex> last;
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (is_excluded(items[k]) || weights[k] <= 0.0) continue;
      acc += weights[k];
      last = items[k];
      if (target < acc) return items[k];
    }
    return *last;
  }
  auto pick = rng.index(available);
  for (ItemIndex item : items) {
    if (is_excluded(item)) continue;
    if (pick-- == 0) return item;
  }
  throw ContractViolation("unreachable: uniform fallback ran past the end");
}

Recommender::Recommender(RecommenderId id, Algorithm algorithm, CandidateFilter filter, HyperParams params,
                         std::span<const std::vector<double>> item_features)
    : id_(id), algorithm_(algorithm), filter_(filter), params_(params), item_count_(item_features.size()) {
  candidate_pos_.assign(item_count_, -1);
  for (ItemIndex i = 0; i < item_count_; ++i) {
    if (!filter_.accepts(item_features[i])) continue;
    candidate_pos_[i] = static_cast<std::int32_t>(candidates_.size());
    candidates_.push_back(i);
  }
  popularity_.assign(candidates_.size(), 1.0);
}

double Recommender::popularity_of(ItemIndex item) const {
  const auto pos = item < item_count_ ? candidate_pos_[item] : -1;
  return pos < 0 ? 0.0 : popularity_[static_cast<std::size_t>(pos)];
}

void Recommender::train(const InteractionMatrix& visible, Rng& rng) {
  if (visible.cols() != item_count_) throw ContractViolation("click matrix does not match the catalog");
  std::fill(popularity_.begin(), popularity_.end(), 1.0);
  for (std::size_t u = 0; u < visible.rows(); ++u)
    for (const auto& e : visible.row(u))
      if (candidate_pos_[e.item] >= 0) popularity_[static_cast<std::size_t>(candidate_pos_[e.item])] += e.count;

  if (visible.active_rows() < std::max<std::size_t>(params_.min_train_consumers, 1)) {
    model_ = Untrained{};
    return;
  }
  switch (algorithm_) {
    case Algorithm::ALS: model_ = train_als(visible, params_.als, rng); break;
    case Algorithm::BPR: model_ = train_bpr(visible, candidates_, params_.bpr, rng); break;
    case Algorithm::ItemKNN: model_ = train_item_knn(visible, params_.knn); break;
  }
}

bool Recommender::personalized_for(ConsumerIndex consumer, std::span<const ClickEvent> profile) const {
  if (!trained() || profile.empty()) return false;
  if (const auto* als = std::get_if<AlsModel>(&model_))
    return consumer < als->has_user.size() && als->has_user[consumer];
  if (const auto* bpr = std::get_if<BprModel>(&model_))
    return consumer < bpr->has_user.size() && bpr->has_user[consumer];
  return true;  // ItemKNN scores straight from the profile
}

std::vector<double> Recommender::score(ConsumerIndex consumer, std::span<const ClickEvent> profile,
                                       std::span<const ItemIndex> items) const {
  std::vector<double> out(items.size(), 0.0);
  if (!personalized_for(consumer, profile)) {
    for (std::size_t k = 0; k < items.size(); ++k) out[k] = popularity_of(items[k]);
    return out;
  }
  if (const auto* als = std::get_if<AlsModel>(&model_)) {
    auto x = als->user_factors.row(consumer);
    for (std::size_t k = 0; k < items.size(); ++k) out[k] = kernels::dot(x, als->item_factors.row(items[k]));
  } else if (const auto* bpr = std::get_if<BprModel>(&model_)) {
    auto w = bpr->user_factors.row(consumer);
    for (std::size_t k = 0; k < items.size(); ++k)
      out[k] = bpr->item_bias[items[k]] + kernels::dot(w, bpr->item_factors.row(items[k]));
  } else if (const auto* knn = std::get_if<KnnModel>(&model_)) {
    std::vector<char> in_profile(item_count_, 0);
    for (const auto& e : profile) in_profile[e.item] = 1;
    for (std::size_t k = 0; k < items.size(); ++k) {
      double s = 0.0;
      for (const auto& nb : knn->neighbors[items[k]])
        if (in_profile[nb.item]) s += nb.similarity;
      out[k] = s;
    }
  }
  return out;
}

Slate Recommender::recommend(ConsumerIndex consumer, std::span<const ClickEvent> profile,
                             std::span<const char> excluded, std::size_t slate_size, Rng& rng) const {
  if (slate_size == 0) throw ContractViolation("slate size must be positive");
  std::vector<ItemIndex> pool;
  std::vector<double> pool_weights;
  for (std::size_t k = 0; k < candidates_.size(); ++k) {
    if (!excluded.empty() && excluded[candidates_[k]]) continue;
    pool.push_back(candidates_[k]);
    pool_weights.push_back(popularity_[k]);
  }
  if (pool.empty()) throw EmptySlateError("no candidate items remain for this consumer");

  Slate slate;
  std::vector<char> taken(item_count_, 0);
  auto take = [&](ItemIndex item, SlotSource src) {
    slate.items.push_back(item);
    slate.sources.push_back(src);
    taken[item] = 1;
  };

  if (!trained()) {
    // Catalog-level fallback: weighted sampling without replacement.
    const std::size_t n = std::min(slate_size, pool.size());
    for (std::size_t k = 0; k < n; ++k) take(popularity_sample(pool, pool_weights, taken, rng), SlotSource::Fallback);
    return slate;
  }

  const std::vector<double> scores = score(consumer, profile, pool);
  const SlotSource ranked_source = personalized_for(consumer, profile) ? SlotSource::Ranked : SlotSource::Fallback;
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t ranked = std::min(slate_size > 1 ? slate_size - 1 : slate_size, pool.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ranked), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : pool[a] < pool[b];
                    });
  for (std::size_t k = 0; k < ranked; ++k) take(pool[order[k]], ranked_source);
  if (slate.size() < slate_size && slate.size() < pool.size())
    take(popularity_sample(pool, pool_weights, taken, rng), SlotSource::PopularitySample);
  return slate;
}

}  // namespace portsim

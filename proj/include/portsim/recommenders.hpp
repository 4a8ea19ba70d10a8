#pragma once

// Ranking models retrained once per cycle on a recommender's visible
// profiles, plus slate assembly with popularity-based fallbacks.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "portsim/common.hpp"
#include "portsim/ecosystem.hpp"
#include "portsim/rng.hpp"

namespace portsim {

enum class Algorithm { ALS, BPR, ItemKNN };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

struct AlsParams {
  std::size_t factors = 32;
  double regularization = 0.1;
  double alpha = 40.0;  // confidence c = 1 + alpha * clicks
  int sweeps = 15;
};

struct BprParams {
  std::size_t factors = 32;
  double learning_rate = 0.05;
  double regularization = 0.01;
  int epochs = 30;
};

struct KnnParams {
  std::size_t neighbors = 50;
};

struct HyperParams {
  AlsParams als;
  BprParams bpr;
  KnnParams knn;
  /// Below this many consumers with clicks the model stays Untrained.
  std::size_t min_train_consumers = 5;
};

/// Sparse consumer x item click counts in CSR layout.
class InteractionMatrix {
 public:
  struct Entry {
    ItemIndex item;
    double count;
  };

  InteractionMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

  /// Builds from (row, col) click pairs; repeated pairs accumulate.
  static InteractionMatrix from_pairs(std::size_t rows, std::size_t cols,
                                      std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);

  /// Every click list a recommender can see.
  static InteractionMatrix from_store(const ProfileStore& store, RecommenderId rec, std::size_t items);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const Entry> row(std::size_t r) const {
    return {entries_.data() + offsets_[r], entries_.data() + offsets_[r + 1]};
  }
  bool contains(std::size_t r, ItemIndex item) const;
  /// Number of rows with at least one entry.
  std::size_t active_rows() const;
  InteractionMatrix transpose() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct Untrained {};

struct AlsModel {
  DenseMatrix user_factors;
  DenseMatrix item_factors;
  std::vector<char> has_user;
};

struct BprModel {
  DenseMatrix user_factors;
  DenseMatrix item_factors;
  std::vector<double> item_bias;
  std::vector<char> has_user;
};

struct Neighbor {
  ItemIndex item;
  double similarity;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct KnnModel {
  /// Per item: most similar other items, descending similarity, ties by
  /// ascending item index; only positive similarities are kept.
  std::vector<std::vector<Neighbor>> neighbors;
};

using ModelState = std::variant<Untrained, AlsModel, BprModel, KnnModel>;

/// Confidence-weighted implicit ALS. When objective_trace is given, the
/// objective after every full sweep is appended to it.
AlsModel train_als(const InteractionMatrix& clicks, const AlsParams& params, Rng& rng,
                   std::vector<double>* objective_trace = nullptr);

/// sum_{u active, i} c_ui (p_ui - x_u.y_i)^2 + lambda (sum |x_u|^2 + sum |y_i|^2)
double als_objective(const InteractionMatrix& clicks, const AlsModel& model, const AlsParams& params);

/// Pairwise BPR-MF with SGD. Negatives are drawn uniformly from
/// negative_pool minus the consumer's clicked items.
BprModel train_bpr(const InteractionMatrix& clicks, std::span<const ItemIndex> negative_pool, const BprParams& params,
                   Rng& rng);

/// Cosine similarity over binary item click vectors, top-M per item.
KnnModel train_item_knn(const InteractionMatrix& clicks, const KnnParams& params);

class CandidateFilter {
 public:
  static CandidateFilter all() { return CandidateFilter{std::nullopt}; }
  static CandidateFilter requiring_genre(std::size_t genre) { return CandidateFilter{genre}; }

  bool accepts(std::span<const double> features) const {
    return !genre_ || (*genre_ < features.size() && features[*genre_] != 0.0);
  }
  std::optional<std::size_t> genre() const { return genre_; }

 private:
  explicit CandidateFilter(std::optional<std::size_t> g) : genre_(g) {}
  std::optional<std::size_t> genre_;
};

enum class SlotSource { Ranked, PopularitySample, Fallback };

std::string_view to_string(SlotSource s);

struct Slate {
  std::vector<ItemIndex> items;
  std::vector<SlotSource> sources;
  std::size_t size() const { return items.size(); }
};

/// Draws one item with probability weight / sum(weights) over items whose
/// excluded flag is unset (excluded is indexed by item id; empty = none).
/// All-zero remaining weight falls back to a uniform draw. Throws
/// EmptySlateError if every item is excluded.
ItemIndex popularity_sample(std::span<const ItemIndex> items, std::span<const double> weights,
                            std::span<const char> excluded, Rng& rng);

class Recommender {
 public:
  Recommender(RecommenderId id, Algorithm algorithm, CandidateFilter filter, HyperParams params,
              std::span<const std::vector<double>> item_features);

  RecommenderId id() const { return id_; }
  Algorithm algorithm() const { return algorithm_; }
  const CandidateFilter& filter() const { return filter_; }
  const HyperParams& params() const { return params_; }

  /// Filter-passing items, ascending.
  std::span<const ItemIndex> candidates() const { return candidates_; }
  /// Popularity weight per candidate (aligned with candidates()).
  std::span<const double> popularity_weights() const { return popularity_; }
  double popularity_of(ItemIndex item) const;

  const ModelState& model() const { return model_; }
  bool trained() const { return !std::holds_alternative<Untrained>(model_); }

  /// Refits the model and popularity weights on the visible click matrix.
  void train(const InteractionMatrix& visible, Rng& rng);

  /// True when scores for this consumer come from the model rather than the
  /// popularity fallback.
  bool personalized_for(ConsumerIndex consumer, std::span<const ClickEvent> profile) const;

  /// Scores aligned with items.
  std::vector<double> score(ConsumerIndex consumer, std::span<const ClickEvent> profile,
                            std::span<const ItemIndex> items) const;

  /// Builds a slate of up to slate_size items: the top slate_size-1 by score
  /// plus one popularity-sampled item. An untrained recommender fills the
  /// whole slate by weighted sampling. excluded is indexed by item id.
  Slate recommend(ConsumerIndex consumer, std::span<const ClickEvent> profile, std::span<const char> excluded,
                  std::size_t slate_size, Rng& rng) const;

 private:
  RecommenderId id_;
  Algorithm algorithm_;
  CandidateFilter filter_;
  HyperParams params_;
  std::size_t item_count_;
  std::vector<ItemIndex> candidates_;
  std::vector<std::int32_t> candidate_pos_;
  std::vector<double> popularity_;
  ModelState model_ = Untrained{};
};

}  // namespace portsim

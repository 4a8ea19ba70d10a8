#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "portsim/common.hpp"

namespace portsim {

struct ClickEvent {
  ConsumerIndex consumer = 0;
  ItemIndex item = 0;
  std::uint32_t day = 1;    // 1..days_per_cycle
  std::uint32_t cycle = 1;  // 1..cycles

  friend bool operator==(const ClickEvent&, const ClickEvent&) = default;
};

/// Chronological order of click events: by (cycle, day).
inline bool earlier(const ClickEvent& a, const ClickEvent& b) {
  return a.cycle != b.cycle ? a.cycle < b.cycle : a.day < b.day;
}

enum class ProfileMode { Partitioned, Shared };

/// Per-recommender click histories. In Shared mode every recommender id
/// resolves to one common partition.
class ProfileStore {
 public:
  ProfileStore(ProfileMode mode, std::size_t recommenders, std::size_t consumers);

  ProfileMode mode() const { return mode_; }
  std::size_t recommender_count() const { return recommenders_; }
  std::size_t consumer_count() const { return consumers_; }

  /// Click list of a consumer as visible to a recommender (possibly empty).
  /// Throws Error for an unknown recommender id.
  std::span<const ClickEvent> profile(RecommenderId rec, ConsumerIndex consumer) const;
  std::vector<ClickEvent>& mutable_profile(RecommenderId rec, ConsumerIndex consumer);

  /// Appends a click; events must arrive in chronological order per list.
  void append(RecommenderId rec, const ClickEvent& e);

  std::size_t total_clicks(ConsumerIndex consumer) const;

  /// Order-sensitive digest of every partition.
  std::uint64_t digest() const;

 private:
  std::size_t partition_of(RecommenderId rec) const;

  ProfileMode mode_;
  std::size_t recommenders_;
  std::size_t consumers_;
  std::vector<std::vector<std::vector<ClickEvent>>> partitions_;
};

/// Consecutive unclicked impressions per (consumer, item). Counters are
/// global per consumer and not scoped to a recommender.
class ExposureTracker {
 public:
  explicit ExposureTracker(std::size_t consumers) : counters_(consumers) {}

  /// Resets the clicked item's counter and increments every other slate item.
  /// Throws ContractViolation if clicked is not in the slate.
  void record_slate_exposure(ConsumerIndex consumer, std::span<const ItemIndex> slate, ItemIndex clicked);

  std::uint32_t count(ConsumerIndex consumer, ItemIndex item) const;

  /// Items whose counter is at least threshold, ascending.
  std::vector<ItemIndex> withheld_items(ConsumerIndex consumer, std::uint32_t threshold = 3) const;

  /// Cycle boundary: returns each consumer's withheld set for the coming
  /// cycle and clears those counters so the withhold lasts one cycle.
  std::vector<std::vector<ItemIndex>> begin_cycle(std::uint32_t threshold = 3);

 private:
  std::vector<std::map<ItemIndex, std::uint32_t>> counters_;
};

struct ItemRecord {
  ItemIndex id = 0;
  std::vector<double> features;
  ProviderIndex provider = 0;
};

struct ProviderState {
  ProviderIndex id = 0;
  Group group = Group::Generic;
  std::vector<std::uint64_t> clicks_per_cycle;
};

struct ConsumerState {
  ConsumerIndex id = 0;
  std::vector<double> preferences;
  RecommenderId attached = kGenericRecommender;
  /// Running utility estimate per recommender id (indexed by id).
  std::vector<double> utility_estimates;
  Group group = Group::Generic;
  std::optional<RecommenderId> pending_switch;
};

}  // namespace portsim

#include "portsim/ecosystem.hpp"

#include <algorithm>
#include <string>

namespace portsim {

ProfileStore::ProfileStore(ProfileMode mode, std::size_t recommenders, std::size_t consumers)
    : mode_(mode), recommenders_(recommenders), consumers_(consumers) {
  if (recommenders == 0) throw ContractViolation("profile store needs at least one recommender");
  const std::size_t parts = mode == ProfileMode::Shared ? 1 : recommenders;
  partitions_.assign(parts, std::vector<std::vector<ClickEvent>>(consumers));
}

std::size_t ProfileStore::partition_of(RecommenderId rec) const {
  if (rec >= recommenders_) throw Error("unknown recommender id " + std::to_string(rec));
  return mode_ == ProfileMode::Shared ? 0 : rec;
}

std::span<const ClickEvent> ProfileStore::profile(RecommenderId rec, ConsumerIndex consumer) const {
  return partitions_[partition_of(rec)].at(consumer);
}

std::vector<ClickEvent>& ProfileStore::mutable_profile(RecommenderId rec, ConsumerIndex consumer) {
  return partitions_[partition_of(rec)].at(consumer);
}

void ProfileStore::append(RecommenderId rec, const ClickEvent& e) {
  auto& list = mutable_profile(rec, e.consumer);
  if (!list.empty() && earlier(e, list.back())) throw ContractViolation("click events must be appended in time order");
  list.push_back(e);
}

std::size_t ProfileStore::total_clicks(ConsumerIndex consumer) const {
  std::size_t n = 0;
  for (const auto& part : partitions_) n += part.at(consumer).size();
  return n;
}

std::uint64_t ProfileStore::digest() const {
  Digest h;
  h.update_u64(partitions_.size());
  for (const auto& part : partitions_) {
    for (std::size_t j = 0; j < part.size(); ++j) {
      h.update_u64(j);
      h.update_u64(part[j].size());
      for (const auto& e : part[j]) {
        h.update_u64(e.item);
        h.update_u64((static_cast<std::uint64_t>(e.cycle) << 32) | e.day);
      }
    }
  }
  return h.value();
}

void ExposureTracker::record_slate_exposure(ConsumerIndex consumer, std::span<const ItemIndex> slate,
                                            ItemIndex clicked) {
  if (std::find(slate.begin(), slate.end(), clicked) == slate.end())
    throw ContractViolation("clicked item is not in the slate");
  auto& c = counters_.at(consumer);
  for (ItemIndex item : slate) {
    if (item == clicked) {
      c.erase(item);
    } else {
      ++c[item];
    }
  }
}

std::uint32_t ExposureTracker::count(ConsumerIndex consumer, ItemIndex item) const {
  const auto& c = counters_.at(consumer);
  auto it = c.find(item);
  return it == c.end() ? 0 : it->second;
}

std::vector<ItemIndex> ExposureTracker::withheld_items(ConsumerIndex consumer, std::uint32_t threshold) const {
  std::vector<ItemIndex> out;
  for (const auto& [item, n] : counters_.at(consumer))
    if (n >= threshold) out.push_back(item);
  return out;
}

std::vector<std::vector<ItemIndex>> ExposureTracker::begin_cycle(std::uint32_t threshold) {
  std::vector<std::vector<ItemIndex>> out(counters_.size());
  for (std::size_t j = 0; j < counters_.size(); ++j) {
    out[j] = withheld_items(static_cast<ConsumerIndex>(j), threshold);
    for (ItemIndex item : out[j]) counters_[j].erase(item);
  }
  return out;
}

}  // namespace portsim

#include <algorithm>

#include "portsim/recommenders.hpp"

namespace portsim {

InteractionMatrix InteractionMatrix::from_pairs(std::size_t rows, std::size_t cols,
                                                std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end());
  InteractionMatrix m(rows, cols);
  for (std::size_t k = 0; k < sorted.size();) {
    const auto [r, c] = sorted[k];
    if (r >= rows || c >= cols) throw ContractViolation("interaction outside matrix bounds");
    std::size_t end = k;
    while (end < sorted.size() && sorted[end] == sorted[k]) ++end;
    m.entries_.push_back({c, static_cast<double>(end - k)});
    ++m.offsets_[r + 1];
    k = end;
  }
  for (std::size_t r = 0; r < rows; ++r) m.offsets_[r + 1] += m.offsets_[r];
  return m;
}

InteractionMatrix InteractionMatrix::from_store(const ProfileStore& store, RecommenderId rec, std::size_t items) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (ConsumerIndex j = 0; j < store.consumer_count(); ++j)
    for (const auto& e : store.profile(rec, j)) pairs.emplace_back(j, e.item);
  return from_pairs(store.consumer_count(), items, pairs);
}

bool InteractionMatrix::contains(std::size_t r, ItemIndex item) const {
  auto row_entries = row(r);
  auto it = std::lower_bound(row_entries.begin(), row_entries.end(), item,
                             [](const Entry& e, ItemIndex v) { return e.item < v; });
  return it != row_entries.end() && it->item == item;
}

std::size_t InteractionMatrix::active_rows() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += offsets_[r + 1] > offsets_[r];
  return n;
}

InteractionMatrix InteractionMatrix::transpose() const {
  InteractionMatrix t(cols_, rows_);
  for (const auto& e : entries_) ++t.offsets_[e.item + 1];
  for (std::size_t c = 0; c < cols_; ++c) t.offsets_[c + 1] += t.offsets_[c];
  t.entries_.resize(entries_.size());
  std::vector<std::size_t> fill(t.offsets_.begin(), t.offsets_.end() - 1);
  for (std::size_t r = 0; r < rows_; ++r)
    for (const auto& e : row(r)) t.entries_[fill[e.item]++] = {static_cast<ItemIndex>(r), e.count};
  return t;
}

}  // namespace portsim

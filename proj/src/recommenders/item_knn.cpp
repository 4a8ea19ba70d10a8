#include <algorithm>
#include <cmath>

#include "portsim/recommenders.hpp"

namespace portsim {

KnnModel train_item_knn(const InteractionMatrix& clicks, const KnnParams& params) {
  const std::size_t n = clicks.cols();
  const InteractionMatrix by_item = clicks.transpose();
  // Binary vectors: the squared norm of an item is its distinct-consumer count.
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) norm[i] = std::sqrt(static_cast<double>(by_item.row(i).size()));

  KnnModel model;
  model.neighbors.resize(n);
  std::vector<double> co(n, 0.0);
  std::vector<ItemIndex> touched;
  for (std::size_t a = 0; a < n; ++a) {
    touched.clear();
    for (const auto& ue : by_item.row(a)) {
      for (const auto& ie : clicks.row(ue.item)) {
        if (ie.item == a) continue;
        if (co[ie.item] == 0.0) touched.push_back(ie.item);
        co[ie.item] += 1.0;
      }
    }
    auto& list = model.neighbors[a];
    list.reserve(touched.size());
    for (ItemIndex b : touched) {
      list.push_back({b, co[b] / (norm[a] * norm[b])});
      co[b] = 0.0;
    }
    std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) {
      return x.similarity != y.similarity ? x.similarity > y.similarity : x.item < y.item;
    });
    if (list.size() > params.neighbors) list.resize(params.neighbors);
  }
  return model;
}

}  // namespace portsim

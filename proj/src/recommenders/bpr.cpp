#include <cmath>

#include "portsim/kernels.hpp"
#include "portsim/recommenders.hpp"

namespace portsim {

BprModel train_bpr(const InteractionMatrix& clicks, std::span<const ItemIndex> negative_pool, const BprParams& p,
                   Rng& rng) {
  if (p.factors == 0) throw ConfigError("BPR needs at least one factor");
  const std::size_t d = p.factors;
  BprModel m;
  m.user_factors = DenseMatrix(clicks.rows(), d);
  m.item_factors = DenseMatrix(clicks.cols(), d);
  m.item_bias.assign(clicks.cols(), 0.0);
  m.has_user.assign(clicks.rows(), 0);

  std::vector<std::uint32_t> users;
  for (std::size_t u = 0; u < clicks.rows(); ++u) {
    if (clicks.row(u).empty()) continue;
    m.has_user[u] = 1;
    users.push_back(static_cast<std::uint32_t>(u));
  }
  for (auto& v : m.item_factors.data) v = rng.uniform(-0.1, 0.1);
  for (auto u : users)
    for (auto& v : m.user_factors.row(u)) v = rng.uniform(-0.1, 0.1);
  if (users.empty() || negative_pool.empty()) return m;

  const double lr = p.learning_rate;
  const double reg = p.regularization;
  std::vector<double> wu(d), diff(d);
  const std::size_t samples = clicks.nnz();
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    for (std::size_t s = 0; s < samples; ++s) {
      const auto u = users[rng.index(users.size())];
      const auto row = clicks.row(u);
      const ItemIndex pos = row[rng.index(row.size())].item;
      ItemIndex neg = 0;
      bool found = false;
      for (int attempt = 0; attempt < 64 && !found; ++attempt) {
        neg = negative_pool[rng.index(negative_pool.size())];
        found = !clicks.contains(u, neg);
      }
      if (!found) continue;

      auto w = m.user_factors.row(u);
      auto hi = m.item_factors.row(pos);
      auto hj = m.item_factors.row(neg);
      const double x = m.item_bias[pos] - m.item_bias[neg] + kernels::dot(w, hi) - kernels::dot(w, hj);
      const double g = 1.0 / (1.0 + std::exp(x));  // sigmoid(-x)

      std::copy(w.begin(), w.end(), wu.begin());
      std::copy(hi.begin(), hi.end(), diff.begin());
      kernels::axpy(-1.0, hj, diff);

      // w += lr * (g * (h_i - h_j) - reg * w)
      kernels::scale(1.0 - lr * reg, w);
      kernels::axpy(lr * g, diff, w);
      // h_i += lr * (g * w - reg * h_i); h_j += lr * (-g * w - reg * h_j)
      kernels::scale(1.0 - lr * reg, hi);
      kernels::axpy(lr * g, wu, hi);
      kernels::scale(1.0 - lr * reg, hj);
      kernels::axpy(-lr * g, wu, hj);
      m.item_bias[pos] += lr * (g - reg * m.item_bias[pos]);
      m.item_bias[neg] += lr * (-g - reg * m.item_bias[neg]);
    }
  }
  return m;
}

}  // namespace portsim

// Implicit-feedback ALS (confidence-weighted matrix factorization).
//
// Each half-sweep solves, for every row u of one side,
//   (Y^T Y + Y^T (C_u - I) Y + lambda I) x_u = Y^T C_u p_u
// which is the exact minimizer of the objective in that block, so the
// objective cannot increase across sweeps.

#include <cmath>

#include "portsim/kernels.hpp"
#include "portsim/recommenders.hpp"

namespace portsim {
namespace {

// In-place Cholesky factorization (lower triangle) and solve of A x = b for
// a small symmetric positive-definite row-major matrix.
void cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double* rj = a.data() + j * n;
    double d = rj[j] - kernels::dot({rj, j}, {rj, j});
    if (!(d > 0)) throw ContractViolation("ALS normal equations are not positive definite");
    d = std::sqrt(d);
    rj[j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double* ri = a.data() + i * n;
      ri[j] = (ri[j] - kernels::dot({ri, j}, {rj, j})) / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* ri = a.data() + i * n;
    b[i] = (b[i] - kernels::dot({ri, i}, {b.data(), i})) / ri[i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
}

std::vector<double> gram(const DenseMatrix& y) {
  std::vector<double> g(y.cols * y.cols, 0.0);
  for (std::size_t r = 0; r < y.rows; ++r) kernels::rank1_update(1.0, y.row(r), g);
  return g;
}

// Solves every non-empty row of `side` against the fixed factors `other`.
void solve_side(const InteractionMatrix& side, const DenseMatrix& other, DenseMatrix& out, const AlsParams& p) {
  const std::size_t d = p.factors;
  const std::vector<double> g = gram(other);
  std::vector<double> a(d * d);
  std::vector<double> b(d);
  for (std::size_t u = 0; u < side.rows(); ++u) {
    auto entries = side.row(u);
    if (entries.empty()) continue;
    a = g;
    for (std::size_t k = 0; k < d; ++k) a[k * d + k] += p.regularization;
    std::fill(b.begin(), b.end(), 0.0);
    for (const auto& e : entries) {
      const double c = 1.0 + p.alpha * e.count;
      auto y = other.row(e.item);
      kernels::rank1_update(c - 1.0, y, a);
      kernels::axpy(c, y, b);
    }
    cholesky_solve(a, b, d);
    std::copy(b.begin(), b.end(), out.row(u).begin());
  }
}

}  // namespace

double als_objective(const InteractionMatrix& clicks, const AlsModel& m, const AlsParams& p) {
  const std::vector<double> gy = gram(m.item_factors);
  const std::size_t d = p.factors;
  std::vector<double> tmp(d);
  double loss = 0.0;
  double reg = 0.0;
  for (std::size_t u = 0; u < clicks.rows(); ++u) {
    if (!m.has_user[u]) continue;
    auto x = m.user_factors.row(u);
    // sum over all items of (x . y_i)^2 = x^T (Y^T Y) x
    for (std::size_t r = 0; r < d; ++r) tmp[r] = kernels::dot({gy.data() + r * d, d}, x);
    loss += kernels::dot(x, tmp);
    for (const auto& e : clicks.row(u)) {
      const double c = 1.0 + p.alpha * e.count;
      const double pred = kernels::dot(x, m.item_factors.row(e.item));
      loss += c * (1.0 - pred) * (1.0 - pred) - pred * pred;
    }
    reg += kernels::dot(x, x);
  }
  for (std::size_t i = 0; i < m.item_factors.rows; ++i) reg += kernels::dot(m.item_factors.row(i), m.item_factors.row(i));
  return loss + p.regularization * reg;
}

AlsModel train_als(const InteractionMatrix& clicks, const AlsParams& p, Rng& rng, std::vector<double>* objective_trace) {
  if (p.factors == 0) throw ConfigError("ALS needs at least one factor");
  AlsModel m;
  m.user_factors = DenseMatrix(clicks.rows(), p.factors);
  m.item_factors = DenseMatrix(clicks.cols(), p.factors);
  m.has_user.assign(clicks.rows(), 0);
  for (std::size_t u = 0; u < clicks.rows(); ++u) m.has_user[u] = !clicks.row(u).empty();
  for (auto& v : m.item_factors.data) v = rng.uniform() * 0.01;
  for (std::size_t u = 0; u < clicks.rows(); ++u)
    if (m.has_user[u])
      for (auto& v : m.user_factors.row(u)) v = rng.uniform() * 0.01;

  const InteractionMatrix by_item = clicks.transpose();
  for (int sweep = 0; sweep < p.sweeps; ++sweep) {
    solve_side(clicks, m.item_factors, m.user_factors, p);
    // Items without clicks still solve to zero: their right-hand side is empty.
    for (std::size_t i = 0; i < by_item.rows(); ++i)
      if (by_item.row(i).empty()) std::fill(m.item_factors.row(i).begin(), m.item_factors.row(i).end(), 0.0);
    solve_side(by_item, m.user_factors, m.item_factors, p);
    if (objective_trace) objective_trace->push_back(als_objective(clicks, m, p));
  }
  return m;
}

}  // namespace portsim

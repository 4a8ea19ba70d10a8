// Scalar reference kernels. These define the semantics every SIMD variant
// is tested against.

#include "portsim/kernels.hpp"

namespace portsim::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void rank1_scalar(double alpha, const double* x, double* a, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double ax = alpha * x[r];
    double* row = a + r * n;
    for (std::size_t c = 0; c < n; ++c) row[c] += ax * x[c];
  }
}

constexpr KernelTable kScalar{dot_scalar, axpy_scalar, scale_scalar, rank1_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace portsim::kernels

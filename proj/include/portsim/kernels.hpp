#pragma once

// Dense double-precision kernels used by the factor models and the utility
// computations. Every operation has a scalar reference implementation and
// optional SIMD variants; the active backend is chosen once at startup from
// the CPU's capabilities and may be overridden with PORTSIM_KERNELS
// (scalar | avx2 | neon | auto) or set_backend().

#include <cstddef>
#include <span>
#include <string_view>

namespace portsim::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b);

/// True if the backend was compiled in and the running CPU supports it.
bool backend_supported(Backend b);

Backend active_backend();

/// Switches the dispatch table. Throws ConfigError if unsupported.
void set_backend(Backend b);

/// sum_i a[i] * b[i]. Sizes must match.
double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// x *= alpha.
void scale(double alpha, std::span<double> x);

/// A += alpha * x x^T for a row-major n x n matrix A (n = x.size()).
void rank1_update(double alpha, std::span<const double> x, std::span<double> a);

/// Per-backend entry points. Exposed so equivalence tests can call each
/// variant directly regardless of the active dispatch.
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*rank1_update)(double, const double*, double*, std::size_t);
};

const KernelTable& scalar_table();
/// nullptr when the variant is not compiled for this target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace portsim::kernels

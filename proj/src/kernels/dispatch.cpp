#include <atomic>
#include <cstdlib>
#include <string>

#include "portsim/common.hpp"
#include "portsim/kernels.hpp"

namespace portsim::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(PORTSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar: return &scalar_table();
    case Backend::Avx2: return cpu_has_avx2() ? avx2_table() : nullptr;
    case Backend::Neon: return neon_table();
  }
  return nullptr;
}

Backend best_backend() {
  if (table_for(Backend::Avx2)) return Backend::Avx2;
  if (table_for(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

Backend initial_backend() {
  const char* env = std::getenv("PORTSIM_KERNELS");
  if (!env || std::string(env) == "auto" || *env == '\0') return best_backend();
  const std::string v(env);
  Backend want = Backend::Scalar;
  if (v == "avx2") {
    want = Backend::Avx2;
  } else if (v == "neon") {
    want = Backend::Neon;
  } else if (v != "scalar") {
    throw ConfigError("PORTSIM_KERNELS must be one of scalar, avx2, neon, auto; got '" + v + "'");
  }
  if (!table_for(want)) throw ConfigError("kernel backend '" + v + "' is not supported on this machine");
  return want;
}

struct Active {
  std::atomic<const KernelTable*> table;
  std::atomic<Backend> backend;
  Active() {
    const Backend b = initial_backend();
    backend.store(b);
    table.store(table_for(b));
  }
};

Active& active() {
  static Active a;
  return a;
}

inline const KernelTable& t() { return *active().table.load(std::memory_order_relaxed); }

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw ContractViolation("kernel operands differ in length");
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend b) { return table_for(b) != nullptr; }

Backend active_backend() { return active().backend.load(); }

void set_backend(Backend b) {
  const KernelTable* tab = table_for(b);
  if (!tab) throw ConfigError("kernel backend '" + std::string(to_string(b)) + "' is not supported on this machine");
  active().table.store(tab);
  active().backend.store(b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size());
  return t().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size());
  t().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { t().scale(alpha, x.data(), x.size()); }

void rank1_update(double alpha, std::span<const double> x, std::span<double> a) {
  check_same(x.size() * x.size(), a.size());
  t().rank1_update(alpha, x.data(), a.data(), x.size());
}

}  // namespace portsim::kernels

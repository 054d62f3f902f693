#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "smile/simd.hpp"

namespace smile::simd {
namespace {

struct KernelTable {
  Backend backend;
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*squared_distance)(std::span<const double>, std::span<const double>);
  double (*weighted_dot)(std::span<const double>, std::span<const double>,
                         std::span<const double>);
  double (*sum)(std::span<const double>);
};

constexpr KernelTable kScalarTable{Backend::Scalar, scalar::dot, scalar::squared_distance,
                                   scalar::weighted_dot, scalar::sum};
#if defined(SMILE_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Backend::Avx2, avx2::dot, avx2::squared_distance,
                                 avx2::weighted_dot, avx2::sum};
#endif

bool cpu_has_avx2() {
#if defined(SMILE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend backend) {
#if defined(SMILE_HAVE_AVX2)
  if (backend == Backend::Avx2) return &kAvx2Table;
#endif
  (void)backend;
  return &kScalarTable;
}

const KernelTable* detect() {
  const char* env = std::getenv("SMILE_SIMD");
  const std::string request = env ? env : "auto";
  if (request == "scalar") return &kScalarTable;
  if (cpu_has_avx2()) return table_for(Backend::Avx2);
  return &kScalarTable;
}

std::atomic<const KernelTable*> g_table{nullptr};

const KernelTable& table() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* expected = nullptr;
    t = detect();
    if (!g_table.compare_exchange_strong(expected, t, std::memory_order_acq_rel)) t = expected;
  }
  return *t;
}

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend backend) {
  return backend == Backend::Scalar || cpu_has_avx2();
}

Backend active_backend() { return table().backend; }

void set_backend(Backend backend) {
  if (!backend_supported(backend)) {
    throw std::invalid_argument("SIMD backend '" + std::string(backend_name(backend)) +
                                "' is not supported on this CPU");
  }
  g_table.store(table_for(backend), std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return table().dot(a, b);
}
double squared_distance(std::span<const double> a, std::span<const double> b) {
  return table().squared_distance(a, b);
}
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  return table().weighted_dot(w, a, b);
}
double sum(std::span<const double> a) { return table().sum(a); }

}  // namespace smile::simd

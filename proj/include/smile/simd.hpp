#pragma once

// Data-parallel reduction kernels used by the distance, surrogate and
// evaluation code. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2+FMA variant. The variant is chosen once at runtime from
// CPUID and can be forced with SMILE_SIMD=scalar|avx2|auto.
//
// The two backends differ only in summation order, so results agree to a few
// ulps of the sum of absolute terms, not bitwise.

#include <span>
#include <string_view>

namespace smile::simd {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend backend);
bool backend_supported(Backend backend);

Backend active_backend();
// Throws std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
// sum_i w[i] * a[i] * b[i]
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
double sum(std::span<const double> a);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
double sum(std::span<const double> a);
}  // namespace scalar

#if defined(SMILE_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
double sum(std::span<const double> a);
}  // namespace avx2
#endif

}  // namespace smile::simd

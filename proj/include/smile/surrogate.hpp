#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "smile/matrix.hpp"

namespace smile {

struct KernelConfig {
  double width = 1.0;
};

/// exp(-distance^2 / width^2), floored at the smallest normal double so the
/// result stays strictly positive.
double kernel_weight(double distance, const KernelConfig& cfg);

/// Width that maps the median observed distance to a weight of exp(-1/2),
/// i.e. sqrt(2) * median. Falls back to 1 when every distance is zero.
double default_kernel_width(std::span<const double> distances);

struct SurrogateFit {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double lambda = 0.0;
  // 1 - SSE_w / SST_w on the training rows; 1 when the targets are constant.
  double weighted_r2 = 0.0;
  // sqrt(diag(sigma^2 (X'WX + lambda I)^-1)) with sigma^2 = SSE_w / (n - d - 1).
  std::vector<double> standard_errors;
};

/// Minimizes sum_i w_i (y_i - b0 - b . x_i)^2 + lambda |b|^2 with the
/// intercept b0 unpenalized. Features are centered on their weighted means and
/// the normal equations are solved by Cholesky factorization.
SurrogateFit fit_weighted_ridge(MatrixView features, std::span<const double> targets,
                                std::span<const double> weights, double lambda);

struct RankedFeature {
  std::size_t index = 0;
  double coefficient = 0.0;
  bool operator==(const RankedFeature&) const = default;
};

/// Largest |coefficient| first, ties by ascending index; returns min(k, d)
/// entries with their signed coefficients.
std::vector<RankedFeature> select_top_features(std::span<const double> coefficients,
                                               std::size_t k);
inline std::vector<RankedFeature> select_top_features(const SurrogateFit& fit, std::size_t k) {
  return select_top_features(fit.coefficients, k);
}

}  // namespace smile

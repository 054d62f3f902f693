#include "smile/surrogate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "smile/simd.hpp"

namespace smile {

double kernel_weight(double distance, const KernelConfig& cfg) {
  if (!std::isfinite(distance) || distance < 0.0) {
    throw std::invalid_argument("distance must be finite and non-negative");
  }
  if (!(cfg.width > 0.0) || !std::isfinite(cfg.width)) {
    throw std::invalid_argument("kernel width must be positive");
  }
  const double ratio = distance / cfg.width;
  return std::max(std::exp(-ratio * ratio), std::numeric_limits<double>::min());
}

double default_kernel_width(std::span<const double> distances) {
  if (distances.empty()) return 1.0;
  std::vector<double> sorted(distances.begin(), distances.end());
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  double median = sorted[mid];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return median > 0.0 ? std::sqrt(2.0) * median : 1.0;
}

SurrogateFit fit_weighted_ridge(MatrixView features, std::span<const double> targets,
                                std::span<const double> weights, double lambda) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (targets.size() != n || weights.size() != n) {
    throw std::invalid_argument("features, targets and weights must have the same row count");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw std::invalid_argument("lambda must be finite and non-negative");
  }
  std::size_t positive = 0;
  double total_weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw std::invalid_argument("weights must be finite and non-negative");
    }
    if (!std::isfinite(targets[i])) throw std::invalid_argument("non-finite target");
    if (weights[i] > 0.0) ++positive;
    total_weight += weights[i];
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
  if (total_weight <= 0.0) throw std::invalid_argument("all sample weights are zero");
  if (positive < d + 1) {
    throw std::invalid_argument("need at least d+1 rows with positive weight");
  }

  // Centered, column-major copies so every Gram entry is one weighted dot.
  const double y_mean = simd::dot(weights, targets) / total_weight;
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) yc[i] = targets[i] - y_mean;
  std::vector<std::vector<double>> cols(d);
  std::vector<double> x_mean(d);
  for (std::size_t j = 0; j < d; ++j) {
    cols[j] = features.column(j);
    x_mean[j] = simd::dot(weights, cols[j]) / total_weight;
    for (double& v : cols[j]) v -= x_mean[j];
  }

  Eigen::MatrixXd gram(d, d);
  Eigen::VectorXd rhs(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j; k < d; ++k) {
      const double g = simd::weighted_dot(weights, cols[j], cols[k]);
      gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = g;
      gram(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = g;
    }
    rhs(static_cast<Eigen::Index>(j)) = simd::weighted_dot(weights, cols[j], yc);
  }
  gram.diagonal().array() += lambda;

  SurrogateFit fit;
  fit.lambda = lambda;
  fit.coefficients.assign(d, 0.0);
  fit.standard_errors.assign(d, 0.0);
  Eigen::MatrixXd inverse;
  if (d > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    const double scale = gram.diagonal().maxCoeff();
    if (lambda == 0.0 && (llt.info() != Eigen::Success || scale <= 0.0 || llt.rcond() < 1e-13)) {
      throw std::invalid_argument("singular design; set lambda>0");
    }
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("normal equations are numerically singular");
    }
    const Eigen::VectorXd beta = llt.solve(rhs);
    for (std::size_t j = 0; j < d; ++j) fit.coefficients[j] = beta(static_cast<Eigen::Index>(j));
    inverse = llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                  static_cast<Eigen::Index>(d)));
  }
  fit.intercept = y_mean - std::inner_product(fit.coefficients.begin(), fit.coefficients.end(),
                                              x_mean.begin(), 0.0);

  std::vector<double> residual(yc);
  for (std::size_t j = 0; j < d; ++j) {
    const double b = fit.coefficients[j];
    for (std::size_t i = 0; i < n; ++i) residual[i] -= b * cols[j][i];
  }
  const double sse = simd::weighted_dot(weights, residual, residual);
  const double sst = simd::weighted_dot(weights, yc, yc);
  fit.weighted_r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;

  if (d > 0) {
    const double dof = static_cast<double>(std::max<std::size_t>(positive - d - 1, 1));
    const double sigma2 = sse / dof;
    for (std::size_t j = 0; j < d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      fit.standard_errors[j] = std::sqrt(std::max(0.0, sigma2 * inverse(jj, jj)));
    }
  }
  return fit;
}

std::vector<RankedFeature> select_top_features(std::span<const double> coefficients,
                                               std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<RankedFeature> ranked(coefficients.size());
  for (std::size_t i = 0; i < coefficients.size(); ++i) ranked[i] = {i, coefficients[i]};
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
    return std::abs(a.coefficient) > std::abs(b.coefficient);
  });
  ranked.resize(std::min(k, ranked.size()));
  return ranked;
}

}  // namespace smile

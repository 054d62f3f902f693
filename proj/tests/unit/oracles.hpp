#pragma once

// Brute-force reference implementations and random generators shared by the
// unit tests. Deliberately naive: nothing here reuses library code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline double ecdf_at(const std::vector<double>& s, double t) {
  std::size_t c = 0;
  for (double v : s) c += v <= t ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(s.size());
}

inline std::vector<double> pooled_points(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> p(a);
  p.insert(p.end(), b.begin(), b.end());
  std::sort(p.begin(), p.end());
  return p;
}

// Equal sizes only: mean gap between order statistics.
inline double wasserstein_sorted(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

// Midpoint evaluation on every interval between consecutive pooled points.
inline double wasserstein_quadrature(const std::vector<double>& a, const std::vector<double>& b) {
  const auto p = pooled_points(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double mid = 0.5 * (p[i] + p[i + 1]);
    acc += std::abs(ecdf_at(a, mid) - ecdf_at(b, mid)) * (p[i + 1] - p[i]);
  }
  return acc;
}

// Signed sup of F_a - F_b over a dense grid plus every sample point.
inline std::pair<double, double> sup_gaps(const std::vector<double>& a, const std::vector<double>& b,
                                          std::size_t grid = 4000) {
  auto p = pooled_points(a, b);
  const double lo = p.front() - 1.0;
  const double hi = p.back() + 1.0;
  for (std::size_t g = 0; g <= grid; ++g) {
    p.push_back(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid));
  }
  double plus = 0.0;
  double minus = 0.0;
  for (double t : p) {
    const double d = ecdf_at(a, t) - ecdf_at(b, t);
    plus = std::max(plus, d);
    minus = std::max(minus, -d);
  }
  return {plus, minus};
}

inline double ks_grid(const std::vector<double>& a, const std::vector<double>& b) {
  const auto [p, m] = sup_gaps(a, b);
  return std::max(p, m);
}

inline double kuiper_grid(const std::vector<double>& a, const std::vector<double>& b) {
  const auto [p, m] = sup_gaps(a, b);
  return p + m;
}

// Sum over every pooled observation (duplicates counted) divided by the pooled size.
inline double cvm_pooled(const std::vector<double>& a, const std::vector<double>& b) {
  const auto p = pooled_points(a, b);
  double acc = 0.0;
  for (double t : p) {
    const double d = ecdf_at(a, t) - ecdf_at(b, t);
    acc += d * d;
  }
  return acc / static_cast<double>(p.size());
}

inline double ad_pooled(const std::vector<double>& a, const std::vector<double>& b) {
  const auto p = pooled_points(a, b);
  double acc = 0.0;
  for (double t : p) {
    const double h = ecdf_at(p, t);
    if (h <= 0.0 || h >= 1.0) continue;
    const double d = ecdf_at(a, t) - ecdf_at(b, t);
    acc += d * d / (h * (1.0 - h));
  }
  return acc / static_cast<double>(p.size());
}

// Random sample set; about a third of the sets use small integers so ties are common.
inline std::vector<double> random_sample(std::mt19937_64& gen, std::size_t n) {
  std::vector<double> s(n);
  const bool ties = std::uniform_int_distribution<int>(0, 2)(gen) == 0;
  std::normal_distribution<double> normal(std::uniform_real_distribution<double>(-3, 3)(gen),
                                          std::uniform_real_distribution<double>(0.1, 3)(gen));
  std::uniform_int_distribution<int> small(-3, 3);
  for (double& v : s) v = ties ? small(gen) : normal(gen);
  return s;
}

inline std::size_t random_size(std::mt19937_64& gen, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
}

// Plain weighted least squares with intercept via Gauss-Jordan elimination.
inline std::vector<double> weighted_least_squares(const std::vector<std::vector<double>>& rows,
                                                  const std::vector<double>& y,
                                                  const std::vector<double>& w, double lambda = 0.0) {
  const std::size_t d = rows.front().size() + 1;
  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> z{1.0};
    z.insert(z.end(), rows[i].begin(), rows[i].end());
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) a[r][c] += w[i] * z[r] * z[c];
      a[r][d] += w[i] * z[r] * y[i];
    }
  }
  for (std::size_t r = 1; r < d; ++r) a[r][r] += lambda;
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= d; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(d);
  for (std::size_t r = 0; r < d; ++r) beta[r] = a[r][d] / a[r][r];
  return beta;  // intercept first
}

}  // namespace oracle

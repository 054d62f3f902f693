#include "smile/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "smile/simd.hpp"

namespace smile {

Ecdf::Ecdf(std::span<const double> samples) : values_(samples.begin(), samples.end()) {
  validate_and_sort();
}

Ecdf::Ecdf(std::vector<double>&& samples) : values_(std::move(samples)) { validate_and_sort(); }

void Ecdf::validate_and_sort() {
  if (values_.empty()) throw std::invalid_argument("empty sample set");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite sample");
  }
  std::sort(values_.begin(), values_.end());
}

double Ecdf::operator()(double t) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), t);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

Ecdf build_ecdf(std::span<const double> samples) { return Ecdf(samples); }

namespace {

// Walks the distinct pooled values of two samples in ascending order. For each
// value v the visitor gets (v, next distinct value or +inf, F_a(v), F_b(v),
// pooled multiplicity of v, pooled count <= v).
template <typename Visitor>
void merge_walk(const Ecdf& a, const Ecdf& b, Visitor&& visit) {
  const auto va = a.values();
  const auto vb = b.values();
  const std::size_t n = va.size();
  const std::size_t m = vb.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    const double v = std::min(i < n ? va[i] : kInf, j < m ? vb[j] : kInf);
    const std::size_t i0 = i;
    const std::size_t j0 = j;
    while (i < n && va[i] <= v) ++i;
    while (j < m && vb[j] <= v) ++j;
    const double next = std::min(i < n ? va[i] : kInf, j < m ? vb[j] : kInf);
    visit(v, next, static_cast<double>(i) * inv_n, static_cast<double>(j) * inv_m,
          (i - i0) + (j - j0), i + j);
  }
}

}  // namespace

double wasserstein(const Ecdf& a, const Ecdf& b) {
  double area = 0.0;
  merge_walk(a, b, [&](double v, double next, double fa, double fb, std::size_t, std::size_t) {
    if (std::isfinite(next)) area += std::abs(fa - fb) * (next - v);
  });
  return area;
}

double kolmogorov_smirnov(const Ecdf& a, const Ecdf& b) {
  double sup = 0.0;
  merge_walk(a, b, [&](double, double, double fa, double fb, std::size_t, std::size_t) {
    sup = std::max(sup, std::abs(fa - fb));
  });
  return sup;
}

double kuiper(const Ecdf& a, const Ecdf& b) {
  double d_plus = 0.0;
  double d_minus = 0.0;
  merge_walk(a, b, [&](double, double, double fa, double fb, std::size_t, std::size_t) {
    d_plus = std::max(d_plus, fa - fb);
    d_minus = std::max(d_minus, fb - fa);
  });
  return d_plus + d_minus;
}

double cramer_von_mises(const Ecdf& a, const Ecdf& b) {
  const double pooled = static_cast<double>(a.size() + b.size());
  double acc = 0.0;
  merge_walk(a, b, [&](double, double, double fa, double fb, std::size_t mult, std::size_t) {
    const double gap = fa - fb;
    acc += static_cast<double>(mult) * gap * gap;
  });
  return acc / pooled;
}

double anderson_darling(const Ecdf& a, const Ecdf& b) {
  const double lo = std::min(a.values().front(), b.values().front());
  const double hi = std::max(a.values().back(), b.values().back());
  if (lo == hi) throw std::invalid_argument("degenerate pooled sample");
  const double pooled = static_cast<double>(a.size() + b.size());
  double acc = 0.0;
  merge_walk(a, b,
             [&](double, double, double fa, double fb, std::size_t mult, std::size_t below) {
               const double h = static_cast<double>(below) / pooled;
               if (h <= 0.0 || h >= 1.0) return;
               const double gap = fa - fb;
               acc += static_cast<double>(mult) * gap * gap / (h * (1.0 - h));
             });
  return acc / pooled;
}

double ecdf_distance(const Ecdf& a, const Ecdf& b, DistanceMeasure m) {
  switch (m) {
    case DistanceMeasure::Wasserstein:
      return wasserstein(a, b);
    case DistanceMeasure::KolmogorovSmirnov:
      return kolmogorov_smirnov(a, b);
    case DistanceMeasure::Kuiper:
      return kuiper(a, b);
    case DistanceMeasure::CramerVonMises:
      return cramer_von_mises(a, b);
    case DistanceMeasure::AndersonDarling:
      return anderson_darling(a, b);
    case DistanceMeasure::Euclidean:
    case DistanceMeasure::Cosine:
      break;
  }
  throw std::invalid_argument("measure '" + std::string(measure_name(m)) +
                              "' does not operate on ECDFs");
}

double euclidean(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("vector length mismatch");
  return std::sqrt(simd::squared_distance(u, v));
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("vector length mismatch");
  const double uu = simd::dot(u, u);
  const double vv = simd::dot(v, v);
  if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("undefined cosine distance");
  const double cos = simd::dot(u, v) / std::sqrt(uu * vv);
  return 1.0 - std::clamp(cos, -1.0, 1.0);
}

bool is_ecdf_measure(DistanceMeasure m) {
  return m != DistanceMeasure::Euclidean && m != DistanceMeasure::Cosine;
}

std::string_view measure_name(DistanceMeasure m) {
  switch (m) {
    case DistanceMeasure::Wasserstein:
      return "wasserstein";
    case DistanceMeasure::KolmogorovSmirnov:
      return "ks";
    case DistanceMeasure::Kuiper:
      return "kuiper";
    case DistanceMeasure::CramerVonMises:
      return "cvm";
    case DistanceMeasure::AndersonDarling:
      return "ad";
    case DistanceMeasure::Euclidean:
      return "euclidean";
    case DistanceMeasure::Cosine:
      return "cosine";
  }
  return "unknown";
}

std::optional<DistanceMeasure> parse_measure(std::string_view name) {
  for (DistanceMeasure m : kAllMeasures) {
    if (measure_name(m) == name) return m;
  }
  if (name == "kolmogorov-smirnov") return DistanceMeasure::KolmogorovSmirnov;
  if (name == "cramer-von-mises") return DistanceMeasure::CramerVonMises;
  if (name == "anderson-darling") return DistanceMeasure::AndersonDarling;
  return std::nullopt;
}

}  // namespace smile

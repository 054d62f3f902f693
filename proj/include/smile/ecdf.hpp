#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace smile {

/// Empirical CDF of a one-dimensional sample.
///
/// Holds a sorted copy of the sample. Evaluation is right-continuous:
/// F(t) = #{values <= t} / n. Ties need no special treatment.
class Ecdf {
 public:
  /// Throws std::invalid_argument on an empty or non-finite sample.
  explicit Ecdf(std::span<const double> samples);
  explicit Ecdf(std::vector<double>&& samples);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator()(double t) const;

 private:
  void validate_and_sort();
  std::vector<double> values_;
};

Ecdf build_ecdf(std::span<const double> samples);

enum class DistanceMeasure {
  Wasserstein,
  KolmogorovSmirnov,
  Kuiper,
  CramerVonMises,
  AndersonDarling,
  Euclidean,
  Cosine,
};

inline constexpr DistanceMeasure kEcdfMeasures[] = {
    DistanceMeasure::Wasserstein, DistanceMeasure::KolmogorovSmirnov, DistanceMeasure::Kuiper,
    DistanceMeasure::CramerVonMises, DistanceMeasure::AndersonDarling};

inline constexpr DistanceMeasure kAllMeasures[] = {
    DistanceMeasure::Wasserstein,    DistanceMeasure::KolmogorovSmirnov,
    DistanceMeasure::Kuiper,         DistanceMeasure::CramerVonMises,
    DistanceMeasure::AndersonDarling, DistanceMeasure::Euclidean,
    DistanceMeasure::Cosine};

/// True for the measures that compare two Ecdfs; false for the raw-vector
/// baselines (Euclidean, Cosine).
bool is_ecdf_measure(DistanceMeasure m);

/// Canonical lowercase names: "wasserstein", "ks", "kuiper", "cvm", "ad",
/// "euclidean", "cosine".
std::string_view measure_name(DistanceMeasure m);
std::optional<DistanceMeasure> parse_measure(std::string_view name);

// Exact area between the two step functions.
double wasserstein(const Ecdf& a, const Ecdf& b);
double kolmogorov_smirnov(const Ecdf& a, const Ecdf& b);
// D+ + D-, each clamped at zero.
double kuiper(const Ecdf& a, const Ecdf& b);
// Sum of squared ECDF gaps over every pooled sample point, divided by the
// pooled count.
double cramer_von_mises(const Ecdf& a, const Ecdf& b);
// Same pooled sum weighted by 1 / (H (1 - H)), H the pooled ECDF; points with
// H in {0, 1} are skipped. Throws if every pooled value is equal.
double anderson_darling(const Ecdf& a, const Ecdf& b);

/// Dispatches to one of the Ecdf measures above. Throws for Euclidean/Cosine.
double ecdf_distance(const Ecdf& a, const Ecdf& b, DistanceMeasure m);

double euclidean(std::span<const double> u, std::span<const double> v);
/// 1 - cos(u, v). Throws if either vector is zero.
double cosine_distance(std::span<const double> u, std::span<const double> v);

}  // namespace smile

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "smile/explainers.hpp"
#include "smile/image.hpp"
#include "smile/json.hpp"

namespace smile {

// |A n B| / |A u B|. Throws when both sets are empty.
double jaccard_index(const std::set<std::size_t>& a, const std::set<std::size_t>& b);

struct StabilityReport {
  std::size_t runs = 0;
  std::size_t k = 0;
  // All pairs (i < j) in lexicographic order.
  std::vector<double> pairwise_jaccards;
  double mean_jaccard = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> coefficients;  // one row per run
  std::vector<std::set<std::size_t>> top_sets;
};

/// Runs explain_tabular once per seed (seeds must be distinct, at least two),
/// takes the top-k features of each run and scores every pair of runs.
/// Runs execute in parallel across `threads`; results are seed-ordered.
StabilityReport stability_experiment(const TabularModel& model, std::span<const double> x,
                                     const TabularExplainerConfig& base,
                                     std::span<const std::uint64_t> seeds, std::size_t k,
                                     std::size_t threads = 1);

struct GroundTruthMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<int> labels;
  int coi = 1;  // class of interest

  std::size_t coi_count() const;
};

/// (hits inside the class of interest - hits outside) / pixels in the class
/// of interest, where a hit is a pixel with a positive explanation value.
double coverage(std::span<const double> pixels, const GroundTruthMask& mask);

/// sum(X * M') / (w h) with M' = +1 on the class of interest and -1 elsewhere.
double weighted_coverage(std::span<const double> pixels, const GroundTruthMask& mask);

/// |c[unrelated]| / sum |c|: 0 when the explainer ignores the unrelated
/// feature, 1 when it attributes everything to it.
double robustness_ratio(std::span<const double> coefficients, std::size_t unrelated_index);

/// Every pixel takes its segment's coefficient.
std::vector<double> broadcast_to_pixels(std::span<const double> coefficients,
                                        const SuperpixelMap& segments);

/// Pixels of the selected segments with a positive coefficient keep that
/// coefficient; everything else is zero.
std::vector<double> thresholded_pixels(std::span<const double> coefficients,
                                       const SuperpixelMap& segments,
                                       std::span<const RankedFeature> selected);

Json stability_report_to_json(const StabilityReport& report, DistanceMeasure measure);

}  // namespace smile

#include "smile/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "smile/simd.hpp"
#include "smile/surrogate.hpp"

namespace smile {

double jaccard_index(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  if (a.empty() && b.empty()) throw std::invalid_argument("undefined Jaccard");
  std::size_t common = 0;
  for (auto v : a) common += b.count(v);
  const std::size_t united = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(united);
}

StabilityReport stability_experiment(const TabularModel& model, std::span<const double> x,
                                     const TabularExplainerConfig& base,
                                     std::span<const std::uint64_t> seeds, std::size_t k,
                                     std::size_t threads) {
  if (seeds.size() < 2) throw std::invalid_argument("stability needs at least 2 runs");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw std::invalid_argument("seeds must be distinct");

  StabilityReport report;
  report.runs = seeds.size();
  report.k = k;
  report.seeds.assign(seeds.begin(), seeds.end());
  report.coefficients.resize(seeds.size());
  report.top_sets.resize(seeds.size());
  detail::parallel_for(seeds.size(), threads, [&](std::size_t r) {
    TabularExplainerConfig cfg = base;
    cfg.perturbation.seed = seeds[r];
    cfg.threads = 1;
    const Explanation expl = explain_tabular(model, x, cfg);
    report.coefficients[r] = expl.coefficients;
    for (const auto& f : select_top_features(expl.coefficients, k)) report.top_sets[r].insert(f.index);
  });

  for (std::size_t i = 0; i < report.runs; ++i) {
    for (std::size_t j = i + 1; j < report.runs; ++j) {
      report.pairwise_jaccards.push_back(jaccard_index(report.top_sets[i], report.top_sets[j]));
    }
  }
  double total = 0.0;
  for (double v : report.pairwise_jaccards) total += v;
  report.mean_jaccard = total / static_cast<double>(report.pairwise_jaccards.size());
  return report;
}

std::size_t GroundTruthMask::coi_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), coi));
}

namespace {

void check_pixels(std::span<const double> pixels, const GroundTruthMask& mask) {
  if (mask.labels.size() != mask.width * mask.height) {
    throw std::invalid_argument("ground-truth label count does not match its dimensions");
  }
  if (pixels.size() != mask.labels.size()) {
    throw std::invalid_argument("explanation and ground-truth mask dimensions differ");
  }
}

}  // namespace

double coverage(std::span<const double> pixels, const GroundTruthMask& mask) {
  check_pixels(pixels, mask);
  const std::size_t in_class = mask.coi_count();
  if (in_class == 0) {
    throw std::invalid_argument("class of interest " + std::to_string(mask.coi) +
                                " does not occur in the mask");
  }
  long long hits = 0;
  for (std::size_t p = 0; p < pixels.size(); ++p) {
    if (pixels[p] > 0.0) hits += mask.labels[p] == mask.coi ? 1 : -1;
  }
  return static_cast<double>(hits) / static_cast<double>(in_class);
}

double weighted_coverage(std::span<const double> pixels, const GroundTruthMask& mask) {
  check_pixels(pixels, mask);
  std::vector<double> sign(mask.labels.size());
  for (std::size_t p = 0; p < sign.size(); ++p) sign[p] = mask.labels[p] == mask.coi ? 1.0 : -1.0;
  return simd::dot(pixels, sign) / static_cast<double>(pixels.size());
}

double robustness_ratio(std::span<const double> coefficients, std::size_t unrelated_index) {
  if (unrelated_index >= coefficients.size()) {
    throw std::invalid_argument("unrelated index out of range");
  }
  double total = 0.0;
  for (double c : coefficients) total += std::abs(c);
  if (total == 0.0) throw std::invalid_argument("all coefficients are zero");
  return std::abs(coefficients[unrelated_index]) / total;
}

std::vector<double> broadcast_to_pixels(std::span<const double> coefficients,
                                        const SuperpixelMap& segments) {
  if (coefficients.size() != segments.n_segments) {
    throw std::invalid_argument("coefficient count does not match segment count");
  }
  std::vector<double> out(segments.labels.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = coefficients[segments.labels[p]];
  return out;
}

std::vector<double> thresholded_pixels(std::span<const double> coefficients,
                                       const SuperpixelMap& segments,
                                       std::span<const RankedFeature> selected) {
  std::vector<double> kept(coefficients.size(), 0.0);
  for (const auto& f : selected) {
    if (f.index >= kept.size()) throw std::invalid_argument("selected segment out of range");
    kept[f.index] = std::max(0.0, coefficients[f.index]);
  }
  return broadcast_to_pixels(kept, segments);
}

Json stability_report_to_json(const StabilityReport& report, DistanceMeasure measure) {
  Json top = Json::array();
  for (const auto& s : report.top_sets) top.push_back(std::vector<std::size_t>(s.begin(), s.end()));
  return Json{
      {"schema_version", kSchemaVersion},
      {"kind", "stability"},
      {"measure", measure_name(measure)},
      {"runs", report.runs},
      {"k", report.k},
      {"seeds", report.seeds},
      {"mean_jaccard", report.mean_jaccard},
      {"pairwise_jaccards", report.pairwise_jaccards},
      {"top_sets", std::move(top)},
  };
}

}  // namespace smile

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "smile/evaluation.hpp"
#include "smile/segmentation.hpp"

using namespace smile;

namespace {

// 2x2 mask with the class of interest (7) on the top row.
GroundTruthMask top_row_mask() { return {2, 2, {7, 7, 3, 3}, 7}; }

std::set<std::size_t> random_set(std::mt19937_64& gen) {
  std::set<std::size_t> s;
  const int n = std::uniform_int_distribution<int>(0, 6)(gen);
  for (int i = 0; i < n; ++i) s.insert(std::uniform_int_distribution<std::size_t>(0, 8)(gen));
  return s;
}

}  // namespace

TEST(Jaccard, Examples) {
  EXPECT_EQ(jaccard_index({1, 2}, {1, 2}), 1.0);
  EXPECT_EQ(jaccard_index({1}, {2}), 0.0);
  EXPECT_EQ(jaccard_index({1, 2, 3}, {2, 3, 4}), 0.5);
  try {
    jaccard_index({}, {});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "undefined Jaccard");
  }
}

TEST(Jaccard, SymmetricAndOneIffEqual) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_set(gen), b = random_set(gen);
    if (a.empty() && b.empty()) continue;
    const double j = jaccard_index(a, b);
    EXPECT_EQ(j, jaccard_index(b, a));
    EXPECT_EQ(j == 1.0, a == b);
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 1.0);
  }
}

TEST(Coverage, HandEvaluated) {
  const auto mask = top_row_mask();
  EXPECT_DOUBLE_EQ(coverage(std::vector<double>{1, 0, 0, 0}, mask), 0.5);
  EXPECT_DOUBLE_EQ(coverage(std::vector<double>{2, 0.1, 0, 0}, mask), 1.0);
  EXPECT_DOUBLE_EQ(coverage(std::vector<double>{0, 0, 0, 0}, mask), 0.0);
  EXPECT_DOUBLE_EQ(coverage(std::vector<double>{1, 1, 1, 1}, mask), 0.0);
  EXPECT_DOUBLE_EQ(coverage(std::vector<double>{-1, 0, 5, 5}, mask), -1.0);
  GroundTruthMask absent = mask;
  absent.coi = 9;
  EXPECT_THROW(coverage(std::vector<double>{1, 0, 0, 0}, absent), std::invalid_argument);
  EXPECT_THROW(coverage(std::vector<double>{1, 0, 0}, mask), std::invalid_argument);
}

TEST(WeightedCoverage, HandEvaluated) {
  const auto mask = top_row_mask();
  EXPECT_DOUBLE_EQ(weighted_coverage(std::vector<double>{1, 0, 0, 0}, mask), 0.25);
  EXPECT_DOUBLE_EQ(weighted_coverage(std::vector<double>{0, 0, 0, 0}, mask), 0.0);
  EXPECT_DOUBLE_EQ(weighted_coverage(std::vector<double>{1, 1, 1, 1}, mask), 0.0);
  EXPECT_DOUBLE_EQ(weighted_coverage(std::vector<double>{0.5, 0.25, -1, 2}, mask), (0.75 + 1 - 2) / 4);
}

TEST(CoverageProperties, ScaleBehaviour) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> c(0.01, 50);
  for (int t = 0; t < 200; ++t) {
    GroundTruthMask mask{5, 4, std::vector<int>(20), 1};
    std::vector<double> x(20);
    for (std::size_t p = 0; p < 20; ++p) {
      mask.labels[p] = n(gen) > 0 ? 1 : 0;
      x[p] = n(gen);
    }
    mask.labels[0] = 1;
    const double k = c(gen);
    auto scaled = x;
    for (double& v : scaled) v *= k;
    EXPECT_EQ(coverage(scaled, mask), coverage(x, mask));
    EXPECT_NEAR(weighted_coverage(scaled, mask), k * weighted_coverage(x, mask), 1e-12 * k);
  }
}

TEST(RobustnessRatio, Examples) {
  EXPECT_DOUBLE_EQ(robustness_ratio(std::vector<double>{0.1, 0.1, 0.8}, 2), 0.8);
  EXPECT_EQ(robustness_ratio(std::vector<double>{0.4, -2, 0}, 2), 0.0);
  EXPECT_DOUBLE_EQ(robustness_ratio(std::vector<double>{-1, 0, 3}, 0), 0.25);
  EXPECT_THROW(robustness_ratio(std::vector<double>{0, 0}, 0), std::invalid_argument);
  EXPECT_THROW(robustness_ratio(std::vector<double>{1, 0}, 2), std::invalid_argument);
}

TEST(RobustnessRatio, ScaleInvariant) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> c(4);
    for (double& v : c) v = n(gen);
    auto s = c;
    for (double& v : s) v *= 17.5;
    EXPECT_NEAR(robustness_ratio(s, 1), robustness_ratio(c, 1), 1e-15);
  }
}

TEST(Pixels, BroadcastAndThreshold) {
  const auto segs = grid_segments(4, 2, 1, 2);
  EXPECT_EQ(broadcast_to_pixels(std::vector<double>{2, -1}, segs),
            (std::vector<double>{2, 2, -1, -1, 2, 2, -1, -1}));
  const std::vector<RankedFeature> selected{{1, -1}, {0, 2}};
  EXPECT_EQ(thresholded_pixels(std::vector<double>{2, -1}, segs, selected),
            (std::vector<double>{2, 2, 0, 0, 2, 2, 0, 0}));
  EXPECT_THROW(broadcast_to_pixels(std::vector<double>{1}, segs), std::invalid_argument);
}

TEST(Stability, PairCountAndDegenerateNoise) {
  const LinearFunctionModel f({3.0, -2.0, 0.5});
  TabularExplainerConfig cfg;
  cfg.perturbation.n_primary = 100;
  cfg.perturbation.sigma1 = {1e-12};
  cfg.perturbation.sigma2 = {1e-13};
  const std::vector<double> x{0.1, 0.2, 0.3};
  const std::vector<std::uint64_t> two{1, 2};
  const auto pair = stability_experiment(f, x, cfg, two, 2);
  EXPECT_EQ(pair.pairwise_jaccards.size(), 1u);
  EXPECT_EQ(pair.mean_jaccard, 1.0);

  std::vector<std::uint64_t> seeds(6);
  std::iota(seeds.begin(), seeds.end(), 10);
  cfg.perturbation.sigma1 = {0.5};
  cfg.perturbation.sigma2 = {0.1};
  const auto report = stability_experiment(f, x, cfg, seeds, 2, 3);
  EXPECT_EQ(report.pairwise_jaccards.size(), 15u);
  EXPECT_EQ(report.mean_jaccard, 1.0);
  for (const auto& s : report.top_sets) EXPECT_EQ(s, (std::set<std::size_t>{0, 1}));
}

TEST(Stability, ThreadCountDoesNotChangeReport) {
  TabularExplainerConfig cfg;
  cfg.perturbation.n_primary = 100;
  const std::vector<double> x{0.51, 0.49, 0.5, 0.5, 0.5};
  const std::vector<std::uint64_t> seeds{3, 1, 4, 15};
  const auto a = stability_experiment(MarsModel(), x, cfg, seeds, 2, 1);
  const auto b = stability_experiment(MarsModel(), x, cfg, seeds, 2, 4);
  EXPECT_EQ(a.coefficients, b.coefficients);
  EXPECT_EQ(a.pairwise_jaccards, b.pairwise_jaccards);
  double mean = 0;
  for (double v : a.pairwise_jaccards) mean += v;
  EXPECT_DOUBLE_EQ(a.mean_jaccard, mean / 6.0);
  EXPECT_EQ(stability_report_to_json(a, DistanceMeasure::Wasserstein).dump(),
            stability_report_to_json(b, DistanceMeasure::Wasserstein).dump());
}

TEST(Stability, Validation) {
  const TabularExplainerConfig cfg;
  const std::vector<double> x(5, 0.5);
  EXPECT_THROW(stability_experiment(MarsModel(), x, cfg, std::vector<std::uint64_t>{1}, 2),
               std::invalid_argument);
  EXPECT_THROW(stability_experiment(MarsModel(), x, cfg, std::vector<std::uint64_t>{1, 1}, 2),
               std::invalid_argument);
  EXPECT_THROW(stability_experiment(MarsModel(), x, cfg, std::vector<std::uint64_t>{1, 2}, 0),
               std::invalid_argument);
}

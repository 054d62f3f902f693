#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "smile/explainers.hpp"
#include "smile/segmentation.hpp"

using namespace smile;

namespace {

class ConstantModel final : public TabularModel {
 public:
  explicit ConstantModel(double c) : c_(c) {}
  OutputKind output_kind() const override { return OutputKind::Regression; }
  std::size_t n_outputs() const override { return 1; }
  Matrix predict(MatrixView rows) const override { return Matrix(rows.rows(), 1, c_); }

 private:
  double c_;
};

class ClassZeroModel final : public TabularModel {
 public:
  OutputKind output_kind() const override { return OutputKind::ClassProbabilities; }
  std::size_t n_outputs() const override { return 2; }
  Matrix predict(MatrixView rows) const override {
    Matrix out(rows.rows(), 2);
    for (std::size_t r = 0; r < rows.rows(); ++r) out(r, 0) = 1.0;
    return out;
  }
};

class ConstantImageModel final : public ImageModel {
 public:
  OutputKind output_kind() const override { return OutputKind::ClassProbabilities; }
  std::size_t n_outputs() const override { return 2; }
  Matrix predict(std::span<const Image> images) const override {
    Matrix out(images.size(), 2);
    for (std::size_t r = 0; r < images.size(); ++r) {
      out(r, 0) = 0.3;
      out(r, 1) = 0.7;
    }
    return out;
  }
};

Image square_image() {
  Image img = Image::filled(32, 32, 1, 0.0);
  for (std::size_t y = 8; y < 16; ++y) {
    for (std::size_t x = 8; x < 16; ++x) img.at(x, y) = 1.0;
  }
  return img;
}

}  // namespace

TEST(ExpectedPrediction, Examples) {
  const Matrix locals = Matrix::from_rows({{1, 2}, {3, -4}, {0, 0}});
  EXPECT_DOUBLE_EQ(expected_prediction(ConstantModel(2.5), locals, std::nullopt), 2.5);
  EXPECT_DOUBLE_EQ(expected_prediction(ClassZeroModel(), locals, 0), 1.0);
  EXPECT_THROW(expected_prediction(ClassZeroModel(), locals, std::nullopt), std::invalid_argument);
  EXPECT_THROW(expected_prediction(ClassZeroModel(), locals, 2), std::invalid_argument);
  EXPECT_THROW(expected_prediction(ConstantModel(1), locals, 0), std::invalid_argument);
}

TEST(ExpectedPrediction, LinearModelAveragesToCenter) {
  TabularPerturbationConfig cfg;
  cfg.n_primary = 2;
  cfg.m_local = 400;
  cfg.sigma2 = {0.5};
  const std::vector<double> mu{1.0, -2.0};
  const auto set = perturb_tabular(mu, cfg);
  const LinearFunctionModel f({2.0, 3.0});
  // Prediction std over the cloud is 0.5 * sqrt(2^2 + 3^2).
  const double tol = 3 * 0.5 * std::sqrt(13.0) / std::sqrt(400.0);
  EXPECT_NEAR(expected_prediction(f, set.origin_locals, std::nullopt), 2.0 * 1.0 + 3.0 * -2.0, tol);
}

TEST(TabularDistance, Examples) {
  const Matrix a = Matrix::from_rows({{0.5, 1}, {1.5, 2}, {-1, 0}});
  EXPECT_EQ(tabular_distance(a, a, DistanceMeasure::Wasserstein), 0.0);
  EXPECT_DOUBLE_EQ(tabular_distance(Matrix::from_rows({{0}, {0}}), Matrix::from_rows({{1}, {1}}),
                                    DistanceMeasure::Wasserstein),
                   1.0);
  EXPECT_DOUBLE_EQ(tabular_distance(Matrix::from_rows({{0, 0}, {0, 0}}),
                                    Matrix::from_rows({{1, 3}, {1, 3}}), DistanceMeasure::Wasserstein),
                   2.0);
  EXPECT_THROW(tabular_distance(a, a, DistanceMeasure::Euclidean), std::invalid_argument);
  EXPECT_THROW(tabular_distance(a, a, DistanceMeasure::Cosine), std::invalid_argument);
}

TEST(ExplainTabular, LinearModelRecoveredForEveryMeasure) {
  const LinearFunctionModel f({3.0, -2.0});
  for (auto m : kEcdfMeasures) {
    TabularExplainerConfig cfg;
    cfg.measure = m;
    cfg.perturbation.sigma1 = {0.5};
    cfg.perturbation.sigma2 = {0.125};
    const auto e = explain_tabular(f, std::vector<double>{0, 0}, cfg);
    EXPECT_NEAR(e.coefficients[0], 3.0, 0.3) << measure_name(m);
    EXPECT_NEAR(e.coefficients[1], -2.0, 0.2) << measure_name(m);
  }
}

TEST(ExplainTabular, IgnoredFeatureGetsNearZero) {
  const LinearFunctionModel f({1.5, -1.0, 0.0});
  const auto e = explain_tabular(f, std::vector<double>{0.2, 0.1, 0.7}, TabularExplainerConfig{});
  const double peak = std::max(std::abs(e.coefficients[0]), std::abs(e.coefficients[1]));
  EXPECT_LT(std::abs(e.coefficients[2]), 0.05 * peak);
}

TEST(ExplainTabular, ConstantModelHasZeroCoefficients) {
  const auto e = explain_tabular(ConstantModel(4.0), std::vector<double>{1, 2, 3}, TabularExplainerConfig{});
  for (double c : e.coefficients) EXPECT_NEAR(c, 0.0, 1e-6);
  EXPECT_NEAR(e.intercept, 4.0, 1e-6);
}

TEST(ExplainTabular, WeightsInUnitInterval) {
  TabularExplainerConfig cfg;
  cfg.perturbation.n_primary = 300;
  for (auto m : kAllMeasures) {
    cfg.measure = m;
    const auto e = explain_tabular(MarsModel(), std::vector<double>{0.51, 0.49, 0.5, 0.5, 0.5}, cfg);
    ASSERT_EQ(e.sample_weights.size(), 300u);
    for (double w : e.sample_weights) {
      EXPECT_GT(w, 0.0);
      EXPECT_LE(w, 1.0);
    }
    EXPECT_EQ(e.coefficients.size(), 5u);
  }
}

TEST(ExplainTabular, SeedDeterminismAcrossThreadCounts) {
  TabularExplainerConfig cfg;
  cfg.perturbation.n_primary = 200;
  cfg.perturbation.seed = 42;
  cfg.measure = DistanceMeasure::KolmogorovSmirnov;
  const std::vector<double> x{0.51, 0.49, 0.5, 0.5, 0.5};
  cfg.threads = 1;
  const auto a = explain_tabular(MarsModel(), x, cfg);
  cfg.threads = 4;
  const auto b = explain_tabular(MarsModel(), x, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(explanation_to_json(a).dump(), explanation_to_json(b).dump());
}

TEST(ExplainTabular, BaselineReducesToPointDistances) {
  TabularExplainerConfig cfg;
  cfg.measure = DistanceMeasure::Euclidean;
  cfg.perturbation.m_local = 2;
  cfg.perturbation.sigma2 = {1e-12};
  cfg.perturbation.n_primary = 100;
  const std::vector<double> x{0.3, -0.1, 2.0};
  const LinearFunctionModel f({1.0, 2.0, -1.0});
  const auto e = explain_tabular(f, x, cfg);
  const auto set = perturb_tabular(x, cfg.perturbation);
  for (std::size_t i = 0; i < 100; ++i) {
    double sq = 0;
    for (std::size_t j = 0; j < 3; ++j) sq += (set.primaries(i, j) - x[j]) * (set.primaries(i, j) - x[j]);
    EXPECT_NEAR(e.distances[i], std::sqrt(sq), 1e-6);
  }
}

TEST(ExplainTabular, Validation) {
  TabularExplainerConfig cfg;
  EXPECT_THROW(explain_tabular(MarsModel(), std::vector<double>{1, 2}, cfg), std::invalid_argument);
  cfg.target_class = 0;
  EXPECT_THROW(explain_tabular(MarsModel(), std::vector<double>(5, 0.5), cfg), std::invalid_argument);
  cfg.target_class.reset();
  cfg.kernel_width = -1.0;
  EXPECT_THROW(explain_tabular(MarsModel(), std::vector<double>(5, 0.5), cfg), std::invalid_argument);
}

TEST(ExplanationJson, RoundTrip) {
  TabularExplainerConfig cfg;
  cfg.perturbation.n_primary = 50;
  cfg.perturbation.seed = 3;
  cfg.target_class = 1;
  const auto e = explain_tabular(biased_model_with_unrelated_feature(0, 1), std::vector<double>{0.2, 0.3}, cfg);
  const Json doc = explanation_to_json(e);
  EXPECT_EQ(doc.at("schema_version"), 1);
  EXPECT_EQ(doc.at("measure"), "wasserstein");
  EXPECT_EQ(doc.at("target_class"), 1);
  const Explanation back = explanation_from_json(Json::parse(doc.dump()));
  EXPECT_EQ(back, e);
}

TEST(ImageDistance, Examples) {
  const Image img = square_image();
  EXPECT_EQ(image_distance(img, img, DistanceMeasure::Wasserstein), 0.0);
  EXPECT_DOUBLE_EQ(image_distance(Image::filled(4, 4, 1, 0.0), Image::filled(4, 4, 1, 1.0),
                                  DistanceMeasure::Wasserstein),
                   1.0);
  Image halves = Image::filled(4, 4, 1, 0.0);
  for (std::size_t p = 8; p < 16; ++p) halves.data[p] = 1.0;
  EXPECT_DOUBLE_EQ(image_distance(halves, Image::filled(4, 4, 1, 0.5), DistanceMeasure::KolmogorovSmirnov),
                   0.5);
  EXPECT_THROW(image_distance(img, Image::filled(4, 4, 1, 0.0), DistanceMeasure::Wasserstein),
               std::invalid_argument);
}

TEST(ExplainImage, RegionSegmentRankedFirst) {
  const Image img = square_image();
  const auto segments = grid_segments(img, 4, 4);
  const auto model = square_region_classifier({8, 8, 8, 8}, 0.5);
  ImageExplainerConfig cfg;
  cfg.k_masks = 500;
  for (auto m : kAllMeasures) {
    cfg.measure = m;
    const auto e = explain_image(model, img, segments, cfg);
    ASSERT_FALSE(e.selected.empty());
    EXPECT_EQ(e.selected.front().index, 5u) << measure_name(m);
    EXPECT_GT(e.selected.front().coefficient, 0.0);
  }
}

TEST(ExplainImage, UnmaskedImageComesFirst) {
  const Image img = square_image();
  const auto segments = grid_segments(img, 4, 4);
  ImageExplainerConfig cfg;
  cfg.k_masks = 50;
  for (auto m : kAllMeasures) {
    cfg.measure = m;
    const auto e = explain_image(square_region_classifier({8, 8, 8, 8}, 0.5), img, segments, cfg);
    EXPECT_EQ(e.explanation.distances[0], 0.0);
    EXPECT_EQ(e.explanation.sample_weights[0], 1.0);
  }
}

TEST(ExplainImage, ModelIgnoringImageGivesNoSignal) {
  const Image img = square_image();
  const auto segments = grid_segments(img, 4, 4);
  ImageExplainerConfig cfg;
  cfg.k_masks = 300;
  const auto e = explain_image(ConstantImageModel(), img, segments, cfg);
  for (std::size_t s = 0; s < 16; ++s) {
    EXPECT_LE(std::abs(e.explanation.coefficients[s]), 3 * e.explanation.standard_errors[s] + 1e-12);
  }
}

TEST(ExplainImage, DeterministicAcrossThreadsAndBatches) {
  const Image img = square_image();
  const auto segments = grid_segments(img, 4, 4);
  const auto model = square_region_classifier({8, 8, 8, 8}, 0.5);
  ImageExplainerConfig cfg;
  cfg.k_masks = 120;
  cfg.seed = 9;
  const auto a = explain_image(model, img, segments, cfg);
  cfg.threads = 3;
  cfg.batch_size = 7;
  const auto b = explain_image(model, img, segments, cfg);
  EXPECT_EQ(a.explanation, b.explanation);
  EXPECT_EQ(a.selected, b.selected);
}

TEST(ExplainImage, JsonCarriesSegmentation) {
  const Image img = square_image();
  const auto segments = grid_segments(img, 2, 2);
  ImageExplainerConfig cfg;
  cfg.k_masks = 20;
  cfg.top_m = 2;
  const auto e = explain_image(square_region_classifier({8, 8, 8, 8}, 0.5), img, segments, cfg);
  const Json doc = image_explanation_to_json(e, segments);
  EXPECT_EQ(doc.at("kind"), "image");
  EXPECT_EQ(doc.at("selected_segments").size(), 2u);
  EXPECT_EQ(segments_from_json(doc), segments);
}

TEST(Heatmap, Examples) {
  const auto two = grid_segments(4, 2, 1, 2);
  const Image white = heatmap_image(std::vector<double>{0, 0}, two);
  for (double v : white.data) EXPECT_EQ(v, 1.0);

  const auto four = grid_segments(4, 4, 2, 2);
  const Image one = heatmap_image(std::vector<double>{0, 0.7, 0, 0}, four);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) {
      const bool red = four.at(x, y) == 1;
      EXPECT_EQ(one.at(x, y, 0), 1.0);
      EXPECT_EQ(one.at(x, y, 1), red ? 0.0 : 1.0);
      EXPECT_EQ(one.at(x, y, 2), red ? 0.0 : 1.0);
    }
  }

  const Image split = heatmap_image(std::vector<double>{1, -1}, two);
  for (std::size_t y = 0; y < 2; ++y) {
    EXPECT_EQ((std::vector<double>{split.at(0, y, 0), split.at(0, y, 1), split.at(0, y, 2)}),
              (std::vector<double>{1, 0, 0}));
    EXPECT_EQ((std::vector<double>{split.at(3, y, 0), split.at(3, y, 1), split.at(3, y, 2)}),
              (std::vector<double>{0, 0, 1}));
  }
  EXPECT_THROW(heatmap_image(std::vector<double>{1}, two), std::invalid_argument);
}

TEST(Heatmap, RenderWritesPngAndRejectsBadPath) {
  const auto two = grid_segments(4, 2, 1, 2);
  Explanation e;
  e.coefficients = {1, -1};
  const auto path = std::filesystem::temp_directory_path() / "smile_heatmap_test.png";
  render_heatmap(e, two, path);
  EXPECT_EQ(read_image(path), heatmap_image(e.coefficients, two));
  EXPECT_THROW(render_heatmap(e, two, "/nonexistent_dir/x/heat.png"), std::runtime_error);
}

TEST(Overlay, DarkensUnselectedSegments) {
  const auto segs = grid_segments(4, 2, 1, 2);
  const Image img = Image::filled(4, 2, 1, 1.0);
  const Image out = overlay_image(img, segs, std::vector<RankedFeature>{{1, 0.5}});
  EXPECT_DOUBLE_EQ(out.at(0, 0), 0.3);
  EXPECT_DOUBLE_EQ(out.at(3, 1), 1.0);
}

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smile/image.hpp"
#include "smile/matrix.hpp"

namespace smile {

enum class OutputKind { Regression, ClassProbabilities };

/// Opaque model over feature vectors. predict() maps a batch of rows to a
/// rows x n_outputs() matrix: one column for regression, one probability per
/// class otherwise. Implementations are immutable and reentrant.
class TabularModel {
 public:
  virtual ~TabularModel() = default;
  virtual OutputKind output_kind() const = 0;
  virtual std::size_t n_outputs() const = 0;
  // Expected input width, when the model fixes one.
  virtual std::optional<std::size_t> n_features() const { return std::nullopt; }
  virtual Matrix predict(MatrixView rows) const = 0;

  std::vector<double> predict_one(std::span<const double> x) const;
};

/// Opaque model over images; same output convention as TabularModel.
class ImageModel {
 public:
  virtual ~ImageModel() = default;
  virtual OutputKind output_kind() const = 0;
  virtual std::size_t n_outputs() const = 0;
  virtual Matrix predict(std::span<const Image> images) const = 0;
};

// 10 sin(pi x1 x2) + 20 (x3 - 0.05)^2 + 5 x4 + 5 x5. Throws unless x has 5 entries.
double mars_function(std::span<const double> x);

class MarsModel final : public TabularModel {
 public:
  OutputKind output_kind() const override { return OutputKind::Regression; }
  std::size_t n_outputs() const override { return 1; }
  std::optional<std::size_t> n_features() const override { return 5; }
  Matrix predict(MatrixView rows) const override;
};

/// f(x) = intercept + coefficients . x
class LinearFunctionModel final : public TabularModel {
 public:
  LinearFunctionModel(std::vector<double> coefficients, double intercept = 0.0);
  OutputKind output_kind() const override { return OutputKind::Regression; }
  std::size_t n_outputs() const override { return 1; }
  std::optional<std::size_t> n_features() const override { return coefficients_.size(); }
  Matrix predict(MatrixView rows) const override;

  const std::vector<double>& coefficients() const { return coefficients_; }
  double intercept() const { return intercept_; }

 private:
  std::vector<double> coefficients_;
  double intercept_;
};

/// Multinomial logistic model: p = softmax(W x + b). Classes are indexed
/// 0..K-1; `class_values` remembers the original target value of each.
class LogisticClassifier final : public TabularModel {
 public:
  LogisticClassifier(Matrix weights, std::vector<double> bias, std::vector<double> class_values);
  OutputKind output_kind() const override { return OutputKind::ClassProbabilities; }
  std::size_t n_outputs() const override { return bias_.size(); }
  std::optional<std::size_t> n_features() const override { return weights_.cols(); }
  Matrix predict(MatrixView rows) const override;

  const Matrix& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  const std::vector<double>& class_values() const { return class_values_; }
  std::size_t iterations() const { return iterations_; }
  void set_iterations(std::size_t it) { iterations_ = it; }

 private:
  Matrix weights_;  // K x d
  std::vector<double> bias_;
  std::vector<double> class_values_;
  std::size_t iterations_ = 0;
};

enum class LinearTask { Regression, Classification };

/// Ridge regressor (intercept unpenalized) or multinomial logistic classifier
/// trained by gradient descent until the gradient norm drops below 1e-6 or
/// 1e5 iterations pass. Classification targets are class labels; each
/// distinct value becomes a class.
std::shared_ptr<TabularModel> fit_linear_model(MatrixView rows, std::span<const double> targets,
                                               double regularization, LinearTask task);

struct PixelRect {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Two classes, [negative, positive]. Positive probability is 1 when the mean
/// intensity inside the rectangle exceeds the threshold and
/// sigmoid(10 (mean - threshold)) otherwise.
class SquareRegionClassifier final : public ImageModel {
 public:
  SquareRegionClassifier(PixelRect region, double threshold);
  OutputKind output_kind() const override { return OutputKind::ClassProbabilities; }
  std::size_t n_outputs() const override { return 2; }
  Matrix predict(std::span<const Image> images) const override;
  double positive_probability(const Image& img) const;

  const PixelRect& region() const { return region_; }

 private:
  PixelRect region_;
  double threshold_;
};

inline SquareRegionClassifier square_region_classifier(PixelRect region, double threshold) {
  return {region, threshold};
}

struct BiasedModelConfig {
  std::size_t bias_index = 0;
  std::size_t unrelated_index = 1;
  double bias_threshold = 0.0;
  double unrelated_threshold = 0.0;
};

/// Binary classifier that looks only at feature `bias_index`:
/// class 1 iff x[bias_index] > bias_threshold. Probabilities are hard 0/1.
class BiasedModel final : public TabularModel {
 public:
  explicit BiasedModel(BiasedModelConfig cfg);
  OutputKind output_kind() const override { return OutputKind::ClassProbabilities; }
  std::size_t n_outputs() const override { return 2; }
  Matrix predict(MatrixView rows) const override;
  const BiasedModelConfig& config() const { return cfg_; }

 private:
  BiasedModelConfig cfg_;
};

/// Scaffolding attack on perturbation explainers: inputs within `radius` of
/// some reference row are answered by the biased rule; anything farther away
/// (i.e. looks like a synthetic perturbation) is answered by thresholding the
/// unrelated feature instead. The radius defaults to the 99th percentile of
/// nearest-neighbour distances inside the reference set.
class AdversarialModel final : public TabularModel {
 public:
  AdversarialModel(BiasedModelConfig cfg, Matrix reference,
                   std::optional<double> radius = std::nullopt);
  OutputKind output_kind() const override { return OutputKind::ClassProbabilities; }
  std::size_t n_outputs() const override { return 2; }
  std::optional<std::size_t> n_features() const override { return reference_.cols(); }
  Matrix predict(MatrixView rows) const override;

  bool in_distribution(std::span<const double> x) const;
  double radius() const { return radius_; }
  const Matrix& reference() const { return reference_; }

 private:
  BiasedModelConfig cfg_;
  Matrix reference_;
  double radius_;
};

/// Throws std::invalid_argument when the two indices collide.
BiasedModel biased_model_with_unrelated_feature(std::size_t bias_index,
                                                std::size_t unrelated_index);

/// Numeric CSV with a header row; the last column is the target.
struct CsvDataset {
  std::vector<std::string> feature_names;
  std::string target_name;
  Matrix features;
  std::vector<double> targets;

  // Per-feature population standard deviation.
  std::vector<double> feature_stddev() const;
};

CsvDataset read_csv_dataset(const std::filesystem::path& path);

}  // namespace smile

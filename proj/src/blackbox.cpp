#include "smile/blackbox.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "smile/simd.hpp"
#include "smile/surrogate.hpp"

namespace smile {

std::vector<double> TabularModel::predict_one(std::span<const double> x) const {
  const Matrix out = predict(MatrixView(x, 1, x.size()));
  return {out.data().begin(), out.data().end()};
}

namespace {

void require_width(MatrixView rows, std::size_t width, const char* model) {
  if (rows.cols() != width) {
    throw std::invalid_argument(std::string(model) + " expects " + std::to_string(width) +
                                " features, got " + std::to_string(rows.cols()));
  }
}

}  // namespace

double mars_function(std::span<const double> x) {
  if (x.size() != 5) throw std::invalid_argument("MARS function takes exactly 5 inputs");
  const double q = x[2] - 0.05;
  return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * q * q + 5.0 * x[3] + 5.0 * x[4];
}

Matrix MarsModel::predict(MatrixView rows) const {
  require_width(rows, 5, "MARS model");
  Matrix out(rows.rows(), 1);
  for (std::size_t i = 0; i < rows.rows(); ++i) out(i, 0) = mars_function(rows.row(i));
  return out;
}

LinearFunctionModel::LinearFunctionModel(std::vector<double> coefficients, double intercept)
    : coefficients_(std::move(coefficients)), intercept_(intercept) {
  if (coefficients_.empty()) throw std::invalid_argument("linear model needs coefficients");
}

Matrix LinearFunctionModel::predict(MatrixView rows) const {
  require_width(rows, coefficients_.size(), "linear model");
  Matrix out(rows.rows(), 1);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    out(i, 0) = intercept_ + simd::dot(coefficients_, rows.row(i));
  }
  return out;
}

LogisticClassifier::LogisticClassifier(Matrix weights, std::vector<double> bias,
                                       std::vector<double> class_values)
    : weights_(std::move(weights)), bias_(std::move(bias)), class_values_(std::move(class_values)) {
  if (weights_.rows() != bias_.size() || bias_.size() < 2 || class_values_.size() != bias_.size()) {
    throw std::invalid_argument("inconsistent logistic classifier shape");
  }
}

namespace {

void softmax_inplace(std::span<double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : logits) v /= total;
}

}  // namespace

Matrix LogisticClassifier::predict(MatrixView rows) const {
  require_width(rows, weights_.cols(), "logistic classifier");
  const std::size_t k = bias_.size();
  Matrix out(rows.rows(), k);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto p = out.row(i);
    for (std::size_t c = 0; c < k; ++c) p[c] = bias_[c] + simd::dot(weights_.row(c), rows.row(i));
    softmax_inplace(p);
  }
  return out;
}

namespace {

std::shared_ptr<TabularModel> fit_logistic(MatrixView rows, std::span<const double> targets,
                                           double regularization) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  const std::set<double> distinct(targets.begin(), targets.end());
  if (distinct.size() < 2) throw std::invalid_argument("classification needs at least 2 classes");
  const std::vector<double> class_values(distinct.begin(), distinct.end());
  const std::size_t k = class_values.size();
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = static_cast<std::size_t>(
        std::lower_bound(class_values.begin(), class_values.end(), targets[i]) -
        class_values.begin());
  }

  // Train on standardized features, then fold the scaling back into W and b.
  std::vector<double> mean(d, 0.0), scale(d, 1.0);
  Matrix z(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = rows.column(j);
    mean[j] = simd::sum(col) / static_cast<double>(n);
    double var = 0.0;
    for (double v : col) var += (v - mean[j]) * (v - mean[j]);
    var /= static_cast<double>(n);
    if (var > 0.0) scale[j] = std::sqrt(var);
    for (std::size_t i = 0; i < n; ++i) z(i, j) = (col[i] - mean[j]) / scale[j];
  }

  Matrix w(k, d);
  std::vector<double> b(k, 0.0);
  Matrix grad_w(k, d);
  std::vector<double> grad_b(k);
  std::vector<double> p(k);
  // Softmax cross-entropy on standardized data has Lipschitz constant <= (d + 1) / 2.
  const double step = 1.0 / (0.5 * static_cast<double>(d + 1) + regularization);
  constexpr std::size_t kMaxIterations = 100000;
  constexpr double kTolerance = 1e-6;
  std::size_t iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) p[c] = b[c] + simd::dot(w.row(c), z.row(i));
      softmax_inplace(p);
      p[label[i]] -= 1.0;
      for (std::size_t c = 0; c < k; ++c) {
        auto g = grad_w.row(c);
        const auto zi = z.row(i);
        for (std::size_t j = 0; j < d; ++j) g[j] += p[c] * zi[j];
        grad_b[c] += p[c];
      }
    }
    double norm2 = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        grad_w(c, j) = grad_w(c, j) * inv_n + regularization * w(c, j);
        norm2 += grad_w(c, j) * grad_w(c, j);
      }
      grad_b[c] *= inv_n;
      norm2 += grad_b[c] * grad_b[c];
    }
    if (std::sqrt(norm2) < kTolerance) break;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) w(c, j) -= step * grad_w(c, j);
      b[c] -= step * grad_b[c];
    }
  }

  Matrix raw_w(k, d);
  std::vector<double> raw_b(b);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      raw_w(c, j) = w(c, j) / scale[j];
      raw_b[c] -= raw_w(c, j) * mean[j];
    }
  }
  auto model = std::make_shared<LogisticClassifier>(std::move(raw_w), std::move(raw_b), class_values);
  model->set_iterations(iter);
  return model;
}

}  // namespace

std::shared_ptr<TabularModel> fit_linear_model(MatrixView rows, std::span<const double> targets,
                                               double regularization, LinearTask task) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  if (n < 2) throw std::invalid_argument("need at least 2 training rows");
  if (targets.size() != n) throw std::invalid_argument("target count does not match row count");
  if (d == 0) throw std::invalid_argument("training rows have no features");
  if (!std::isfinite(regularization) || regularization < 0.0) {
    throw std::invalid_argument("regularization must be non-negative");
  }
  bool varies = false;
  for (std::size_t j = 0; j < d && !varies; ++j) {
    for (std::size_t i = 1; i < n; ++i) {
      if (rows(i, j) != rows(0, j)) {
        varies = true;
        break;
      }
    }
  }
  if (!varies) throw std::invalid_argument("degenerate input: every feature is constant");

  if (task == LinearTask::Classification) return fit_logistic(rows, targets, regularization);

  const std::vector<double> unit(n, 1.0);
  const SurrogateFit fit = fit_weighted_ridge(rows, targets, unit, regularization);
  return std::make_shared<LinearFunctionModel>(fit.coefficients, fit.intercept);
}

SquareRegionClassifier::SquareRegionClassifier(PixelRect region, double threshold)
    : region_(region), threshold_(threshold) {
  if (region_.width == 0 || region_.height == 0) {
    throw std::invalid_argument("region must have positive size");
  }
}

double SquareRegionClassifier::positive_probability(const Image& img) const {
  if (region_.x + region_.width > img.width || region_.y + region_.height > img.height) {
    throw std::invalid_argument("region lies outside the image");
  }
  double total = 0.0;
  for (std::size_t y = region_.y; y < region_.y + region_.height; ++y) {
    const auto row = std::span<const double>(img.data).subspan(
        (y * img.width + region_.x) * img.channels, region_.width * img.channels);
    total += simd::sum(row);
  }
  const double mean =
      total / static_cast<double>(region_.width * region_.height * img.channels);
  if (mean > threshold_) return 1.0;
  return 1.0 / (1.0 + std::exp(-10.0 * (mean - threshold_)));
}

Matrix SquareRegionClassifier::predict(std::span<const Image> images) const {
  Matrix out(images.size(), 2);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const double p = positive_probability(images[i]);
    out(i, 0) = 1.0 - p;
    out(i, 1) = p;
  }
  return out;
}

namespace {

void check_indices(const BiasedModelConfig& cfg) {
  if (cfg.bias_index == cfg.unrelated_index) {
    throw std::invalid_argument("bias and unrelated feature indices must differ");
  }
}

void require_index(MatrixView rows, std::size_t index) {
  if (index >= rows.cols()) {
    throw std::invalid_argument("feature index " + std::to_string(index) +
                                " out of range for width " + std::to_string(rows.cols()));
  }
}

void write_hard(Matrix& out, std::size_t i, bool positive) {
  out(i, 0) = positive ? 0.0 : 1.0;
  out(i, 1) = positive ? 1.0 : 0.0;
}

}  // namespace

BiasedModel::BiasedModel(BiasedModelConfig cfg) : cfg_(cfg) { check_indices(cfg_); }

Matrix BiasedModel::predict(MatrixView rows) const {
  require_index(rows, cfg_.bias_index);
  require_index(rows, cfg_.unrelated_index);
  Matrix out(rows.rows(), 2);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    write_hard(out, i, rows(i, cfg_.bias_index) > cfg_.bias_threshold);
  }
  return out;
}

BiasedModel biased_model_with_unrelated_feature(std::size_t bias_index,
                                                std::size_t unrelated_index) {
  BiasedModelConfig cfg;
  cfg.bias_index = bias_index;
  cfg.unrelated_index = unrelated_index;
  return BiasedModel(cfg);
}

AdversarialModel::AdversarialModel(BiasedModelConfig cfg, Matrix reference,
                                   std::optional<double> radius)
    : cfg_(cfg), reference_(std::move(reference)), radius_(0.0) {
  check_indices(cfg_);
  if (reference_.rows() < 2) throw std::invalid_argument("reference set needs at least 2 rows");
  require_index(reference_, cfg_.bias_index);
  require_index(reference_, cfg_.unrelated_index);
  if (radius) {
    if (!(*radius > 0.0)) throw std::invalid_argument("radius must be positive");
    radius_ = *radius;
    return;
  }
  const std::size_t n = reference_.rows();
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      nearest[i] = std::min(nearest[i], simd::squared_distance(reference_.row(i), reference_.row(j)));
    }
  }
  std::sort(nearest.begin(), nearest.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1;
  radius_ = std::sqrt(nearest[std::min(idx, n - 1)]);
  if (!(radius_ > 0.0)) throw std::invalid_argument("reference set has duplicate rows only");
}

bool AdversarialModel::in_distribution(std::span<const double> x) const {
  const double r2 = radius_ * radius_;
  for (std::size_t i = 0; i < reference_.rows(); ++i) {
    if (simd::squared_distance(reference_.row(i), x) <= r2) return true;
  }
  return false;
}

Matrix AdversarialModel::predict(MatrixView rows) const {
  require_width(rows, reference_.cols(), "adversarial model");
  Matrix out(rows.rows(), 2);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto x = rows.row(i);
    const bool positive = in_distribution(x) ? x[cfg_.bias_index] > cfg_.bias_threshold
                                             : x[cfg_.unrelated_index] > cfg_.unrelated_threshold;
    write_hard(out, i, positive);
  }
  return out;
}

std::vector<double> CsvDataset::feature_stddev() const {
  std::vector<double> out(features.cols(), 0.0);
  const double n = static_cast<double>(features.rows());
  for (std::size_t j = 0; j < features.cols(); ++j) {
    const auto col = features.column(j);
    const double mean = simd::sum(col) / n;
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    out[j] = std::sqrt(var / n);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r\"");
    const auto last = cell.find_last_not_of(" \t\r\"");
    out.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::invalid_argument("non-numeric value '" + cell + "' on CSV line " +
                                std::to_string(line_no));
  }
  return value;
}

}  // namespace

CsvDataset read_csv_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open CSV file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV file is empty: " + path.string());
  const auto header = split_csv_line(line);
  if (header.size() < 2) {
    throw std::invalid_argument("CSV needs at least one feature column and a target column");
  }
  CsvDataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  ds.target_name = header.back();
  std::vector<double> values;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("CSV line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    }
    for (std::size_t c = 0; c + 1 < cells.size(); ++c) values.push_back(parse_number(cells[c], line_no));
    ds.targets.push_back(parse_number(cells.back(), line_no));
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("CSV file has no data rows: " + path.string());
  ds.features = Matrix(rows, header.size() - 1, std::move(values));
  return ds;
}

}  // namespace smile

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "smile/blackbox.hpp"
#include "smile/ecdf.hpp"
#include "smile/image.hpp"
#include "smile/json.hpp"
#include "smile/perturbation.hpp"
#include "smile/surrogate.hpp"

namespace smile {

/// Local explanation: a weighted linear surrogate fitted around one input.
struct Explanation {
  std::vector<double> coefficients;  // one per feature or per segment
  std::vector<double> standard_errors;
  double intercept = 0.0;
  double weighted_r2 = 0.0;
  DistanceMeasure measure = DistanceMeasure::Wasserstein;
  std::optional<std::size_t> target_class;
  // Per primary sample (tabular) or per mask (image).
  std::vector<double> distances;
  std::vector<double> sample_weights;
  double kernel_width = 0.0;
  std::uint64_t seed = 0;
  Json config;

  bool operator==(const Explanation&) const = default;
};

/// Mean of the model output over a cloud of local samples: the regression
/// value, or the probability of `target_class` for classifiers. Classifiers
/// require a valid target class and regressors reject one.
double expected_prediction(const TabularModel& model, MatrixView locals,
                           std::optional<std::size_t> target_class);

/// Per feature, the ECDF distance between column j of the two sample clouds,
/// averaged over features. Only ECDF measures are accepted.
double tabular_distance(MatrixView origin_locals, MatrixView locals, DistanceMeasure measure);

struct TabularExplainerConfig {
  TabularPerturbationConfig perturbation;
  DistanceMeasure measure = DistanceMeasure::Wasserstein;
  // Unset: sqrt(2) times the median sample distance.
  std::optional<double> kernel_width;
  double lambda = 1e-6;
  std::optional<std::size_t> target_class;
  // 0 means hardware concurrency. Never changes results.
  std::size_t threads = 1;
};

/// Two-stage perturbation, expected predictions over local clouds, ECDF (or,
/// for Euclidean/Cosine, point-to-point) distances to the origin, kernel
/// weights and a weighted ridge surrogate on the primary samples.
Explanation explain_tabular(const TabularModel& model, std::span<const double> x,
                            const TabularExplainerConfig& cfg);

/// ECDF distance between the pixel intensity distributions of two images,
/// averaged over channels. Euclidean and Cosine compare the raw pixel vectors.
double image_distance(const Image& original, const Image& perturbed, DistanceMeasure measure);

struct ImageExplainerConfig {
  std::size_t k_masks = 1000;
  double keep_probability = 0.5;
  DistanceMeasure measure = DistanceMeasure::Wasserstein;
  std::optional<double> kernel_width;
  double lambda = 1e-6;
  std::size_t target_class = 1;
  std::size_t top_m = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t batch_size = 64;
};

struct ImageExplanation {
  Explanation explanation;
  std::vector<RankedFeature> selected;  // top_m segments by |coefficient|
};

/// Binary segment masks are the surrogate features. ECDF measures weight each
/// perturbed image by its distance from the original image; the Euclidean and
/// Cosine baselines compare the mask vector with the all-ones mask instead.
ImageExplanation explain_image(const ImageModel& model, const Image& img,
                               const SuperpixelMap& segments, const ImageExplainerConfig& cfg);

/// Diverging color map of per-segment coefficients, scaled by max |c|:
/// negative blue, zero white, positive red.
Image heatmap_image(std::span<const double> coefficients, const SuperpixelMap& segments);
void render_heatmap(const Explanation& expl, const SuperpixelMap& segments,
                    const std::filesystem::path& out_path);

/// The input image with every segment outside `selected` darkened.
Image overlay_image(const Image& img, const SuperpixelMap& segments,
                    std::span<const RankedFeature> selected);

/// JSON document {schema_version, kind, seed, measure, coefficients, ...}.
Json explanation_to_json(const Explanation& expl);
Json image_explanation_to_json(const ImageExplanation& expl, const SuperpixelMap& segments);
Explanation explanation_from_json(const Json& doc);
SuperpixelMap segments_from_json(const Json& doc);

}  // namespace smile

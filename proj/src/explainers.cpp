#include "smile/explainers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace smile {
namespace {

void check_target(OutputKind kind, std::size_t n_outputs, std::optional<std::size_t> target) {
  if (kind == OutputKind::Regression) {
    if (target) throw std::invalid_argument("target_class is not allowed for a regression model");
    return;
  }
  if (!target) throw std::invalid_argument("target_class is required for a classifier");
  if (*target >= n_outputs) {
    throw std::invalid_argument("target_class " + std::to_string(*target) + " out of range for " +
                                std::to_string(n_outputs) + " classes");
  }
}

double block_mean(const Matrix& outputs, std::size_t first, std::size_t count, std::size_t column) {
  double acc = 0.0;
  for (std::size_t r = first; r < first + count; ++r) acc += outputs(r, column);
  return acc / static_cast<double>(count);
}

// Two identical point masses make the Anderson-Darling weight undefined; they
// are at distance zero under every measure.
double distance_or_zero(const Ecdf& a, const Ecdf& b, DistanceMeasure m) {
  if (m == DistanceMeasure::AndersonDarling && a.values().front() == a.values().back() &&
      b.values().front() == b.values().back() && a.values().front() == b.values().front()) {
    return 0.0;
  }
  return ecdf_distance(a, b, m);
}

std::vector<Ecdf> column_ecdfs(MatrixView samples) {
  std::vector<Ecdf> out;
  out.reserve(samples.cols());
  for (std::size_t j = 0; j < samples.cols(); ++j) out.emplace_back(samples.column(j));
  return out;
}

double mean_column_distance(const std::vector<Ecdf>& reference, MatrixView samples,
                            DistanceMeasure measure) {
  double acc = 0.0;
  for (std::size_t j = 0; j < samples.cols(); ++j) {
    acc += distance_or_zero(reference[j], Ecdf(samples.column(j)), measure);
  }
  return acc / static_cast<double>(samples.cols());
}

std::vector<double> weights_for(std::span<const double> distances, double width) {
  const KernelConfig kernel{width};
  std::vector<double> w(distances.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = kernel_weight(distances[i], kernel);
  return w;
}

Json optional_to_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_to_json(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

double expected_prediction(const TabularModel& model, MatrixView locals,
                           std::optional<std::size_t> target_class) {
  if (locals.rows() == 0) throw std::invalid_argument("need at least one local sample");
  check_target(model.output_kind(), model.n_outputs(), target_class);
  const Matrix out = model.predict(locals);
  return block_mean(out, 0, out.rows(), target_class.value_or(0));
}

double tabular_distance(MatrixView origin_locals, MatrixView locals, DistanceMeasure measure) {
  if (!is_ecdf_measure(measure)) {
    throw std::invalid_argument("tabular_distance needs an ECDF measure; '" +
                                std::string(measure_name(measure)) + "' is a baseline measure");
  }
  if (origin_locals.cols() != locals.cols()) {
    throw std::invalid_argument("sample clouds have different dimensions");
  }
  if (origin_locals.cols() == 0) throw std::invalid_argument("sample clouds have no features");
  return mean_column_distance(column_ecdfs(origin_locals), locals, measure);
}

Explanation explain_tabular(const TabularModel& model, std::span<const double> x,
                            const TabularExplainerConfig& cfg) {
  if (const auto width = model.n_features(); width && *width != x.size()) {
    throw std::invalid_argument("model expects " + std::to_string(*width) + " features, got " +
                                std::to_string(x.size()));
  }
  check_target(model.output_kind(), model.n_outputs(), cfg.target_class);
  if (cfg.kernel_width && !(*cfg.kernel_width > 0.0)) {
    throw std::invalid_argument("kernel width must be positive");
  }

  const PerturbationSet set = perturb_tabular(x, cfg.perturbation);
  const std::size_t n = set.n_primary();
  const std::size_t m = set.m_local;
  const std::size_t column = cfg.target_class.value_or(0);

  const Matrix outputs = model.predict(set.locals);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = block_mean(outputs, i * m, m, column);

  std::vector<double> distances(n);
  switch (cfg.measure) {
    case DistanceMeasure::Euclidean:
      for (std::size_t i = 0; i < n; ++i) distances[i] = euclidean(x, set.primaries.row(i));
      break;
    case DistanceMeasure::Cosine:
      for (std::size_t i = 0; i < n; ++i) distances[i] = cosine_distance(x, set.primaries.row(i));
      break;
    default: {
      const std::vector<Ecdf> origin = column_ecdfs(set.origin_locals);
      detail::parallel_for(n, cfg.threads, [&](std::size_t i) {
        distances[i] = mean_column_distance(origin, set.locals_of(i), cfg.measure);
      });
    }
  }

  const double width = cfg.kernel_width.value_or(default_kernel_width(distances));
  std::vector<double> weights = weights_for(distances, width);
  const SurrogateFit fit = fit_weighted_ridge(set.primaries, targets, weights, cfg.lambda);

  Explanation expl;
  expl.coefficients = fit.coefficients;
  expl.standard_errors = fit.standard_errors;
  expl.intercept = fit.intercept;
  expl.weighted_r2 = fit.weighted_r2;
  expl.measure = cfg.measure;
  expl.target_class = cfg.target_class;
  expl.distances = std::move(distances);
  expl.sample_weights = std::move(weights);
  expl.kernel_width = width;
  expl.seed = cfg.perturbation.seed;
  expl.config = Json{
      {"n_primary", cfg.perturbation.n_primary},
      {"m_local", cfg.perturbation.m_local},
      {"sigma1", cfg.perturbation.sigma1},
      {"sigma2", cfg.perturbation.sigma2},
      {"measure", measure_name(cfg.measure)},
      {"kernel_width", optional_to_json(cfg.kernel_width)},
      {"lambda", cfg.lambda},
      {"target_class", optional_to_json(cfg.target_class)},
      {"origin", std::vector<double>(x.begin(), x.end())},
  };
  return expl;
}

double image_distance(const Image& original, const Image& perturbed, DistanceMeasure measure) {
  if (!original.same_shape(perturbed)) throw std::invalid_argument("image dimensions differ");
  if (measure == DistanceMeasure::Euclidean) return euclidean(original.data, perturbed.data);
  if (measure == DistanceMeasure::Cosine) return cosine_distance(original.data, perturbed.data);
  double acc = 0.0;
  for (std::size_t c = 0; c < original.channels; ++c) {
    acc += distance_or_zero(Ecdf(original.channel(c)), Ecdf(perturbed.channel(c)), measure);
  }
  return acc / static_cast<double>(original.channels);
}

ImageExplanation explain_image(const ImageModel& model, const Image& img,
                               const SuperpixelMap& segments, const ImageExplainerConfig& cfg) {
  img.validate();
  segments.validate();
  if (img.width != segments.width || img.height != segments.height) {
    throw std::invalid_argument("image and segment map dimensions differ");
  }
  if (cfg.target_class >= model.n_outputs()) {
    throw std::invalid_argument("target_class out of range for the model outputs");
  }
  if (cfg.top_m < 1) throw std::invalid_argument("top_m must be >= 1");
  if (cfg.kernel_width && !(*cfg.kernel_width > 0.0)) {
    throw std::invalid_argument("kernel width must be positive");
  }

  const MaskSet masks = generate_masks(segments.n_segments, cfg.k_masks, cfg.keep_probability, cfg.seed);
  const std::size_t k = masks.k();
  const std::size_t d = segments.n_segments;
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);

  std::vector<Ecdf> original_channels;
  if (is_ecdf_measure(cfg.measure)) {
    for (std::size_t c = 0; c < img.channels; ++c) original_channels.emplace_back(img.channel(c));
  }
  const std::vector<double> ones(d, 1.0);

  std::vector<double> targets(k);
  std::vector<double> distances(k);
  for (std::size_t first = 0; first < k; first += batch) {
    const std::size_t count = std::min(batch, k - first);
    std::vector<Image> perturbed(count);
    detail::parallel_for(count, cfg.threads, [&](std::size_t b) {
      const auto& mask = masks.masks[first + b];
      perturbed[b] = apply_mask(img, segments, mask);
      if (is_ecdf_measure(cfg.measure)) {
        double acc = 0.0;
        for (std::size_t c = 0; c < img.channels; ++c) {
          acc += distance_or_zero(original_channels[c], Ecdf(perturbed[b].channel(c)), cfg.measure);
        }
        distances[first + b] = acc / static_cast<double>(img.channels);
      } else {
        const std::vector<double> bits(mask.begin(), mask.end());
        if (cfg.measure == DistanceMeasure::Euclidean) {
          distances[first + b] = euclidean(ones, bits);
        } else {
          // An all-zero mask has no direction; treat it as orthogonal.
          const bool empty = std::all_of(mask.begin(), mask.end(), [](auto v) { return v == 0; });
          distances[first + b] = empty ? 1.0 : cosine_distance(ones, bits);
        }
      }
    });
    const Matrix probs = model.predict(perturbed);
    for (std::size_t b = 0; b < count; ++b) targets[first + b] = probs(b, cfg.target_class);
  }

  Matrix features(k, d);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < d; ++s) features(r, s) = masks.masks[r][s];
  }
  const double width = cfg.kernel_width.value_or(default_kernel_width(distances));
  std::vector<double> weights = weights_for(distances, width);
  const SurrogateFit fit = fit_weighted_ridge(features, targets, weights, cfg.lambda);

  ImageExplanation out;
  Explanation& expl = out.explanation;
  expl.coefficients = fit.coefficients;
  expl.standard_errors = fit.standard_errors;
  expl.intercept = fit.intercept;
  expl.weighted_r2 = fit.weighted_r2;
  expl.measure = cfg.measure;
  expl.target_class = cfg.target_class;
  expl.distances = std::move(distances);
  expl.sample_weights = std::move(weights);
  expl.kernel_width = width;
  expl.seed = cfg.seed;
  expl.config = Json{
      {"k_masks", cfg.k_masks},
      {"keep_probability", cfg.keep_probability},
      {"measure", measure_name(cfg.measure)},
      {"kernel_width", optional_to_json(cfg.kernel_width)},
      {"lambda", cfg.lambda},
      {"target_class", cfg.target_class},
      {"top_m", cfg.top_m},
      {"image", {{"width", img.width}, {"height", img.height}, {"channels", img.channels}}},
  };
  out.selected = select_top_features(fit, cfg.top_m);
  return out;
}

Image heatmap_image(std::span<const double> coefficients, const SuperpixelMap& segments) {
  if (coefficients.size() != segments.n_segments) {
    throw std::invalid_argument("coefficient count does not match segment count");
  }
  double peak = 0.0;
  for (double c : coefficients) peak = std::max(peak, std::abs(c));
  Image out = Image::filled(segments.width, segments.height, 3, 1.0);
  if (peak == 0.0) return out;
  for (std::size_t p = 0; p < segments.labels.size(); ++p) {
    const double t = coefficients[segments.labels[p]] / peak;
    double* rgb = &out.data[p * 3];
    if (t > 0.0) {
      rgb[1] = rgb[2] = 1.0 - t;
    } else if (t < 0.0) {
      rgb[0] = rgb[1] = 1.0 + t;
    }
  }
  return out;
}

void render_heatmap(const Explanation& expl, const SuperpixelMap& segments,
                    const std::filesystem::path& out_path) {
  write_png(out_path, heatmap_image(expl.coefficients, segments));
}

Image overlay_image(const Image& img, const SuperpixelMap& segments,
                    std::span<const RankedFeature> selected) {
  std::vector<bool> keep(segments.n_segments, false);
  for (const auto& f : selected) {
    if (f.index < keep.size()) keep[f.index] = true;
  }
  Image out = img;
  for (std::size_t p = 0; p < segments.labels.size(); ++p) {
    if (keep[segments.labels[p]]) continue;
    for (std::size_t c = 0; c < img.channels; ++c) out.data[p * img.channels + c] *= 0.3;
  }
  return out;
}

Json explanation_to_json(const Explanation& expl) {
  return Json{
      {"schema_version", kSchemaVersion},
      {"kind", "tabular"},
      {"seed", expl.seed},
      {"measure", measure_name(expl.measure)},
      {"target_class", optional_to_json(expl.target_class)},
      {"coefficients", expl.coefficients},
      {"standard_errors", expl.standard_errors},
      {"intercept", expl.intercept},
      {"weighted_r2", expl.weighted_r2},
      {"kernel_width", expl.kernel_width},
      {"config", expl.config},
      {"distances", expl.distances},
      {"sample_weights", expl.sample_weights},
  };
}

Json image_explanation_to_json(const ImageExplanation& expl, const SuperpixelMap& segments) {
  Json doc = explanation_to_json(expl.explanation);
  doc["kind"] = "image";
  Json selected = Json::array();
  for (const auto& f : expl.selected) {
    selected.push_back({{"segment", f.index}, {"coefficient", f.coefficient}});
  }
  doc["selected_segments"] = std::move(selected);
  doc["segmentation"] = Json{{"width", segments.width},
                             {"height", segments.height},
                             {"n_segments", segments.n_segments},
                             {"labels", segments.labels}};
  return doc;
}

Explanation explanation_from_json(const Json& doc) {
  if (doc.value("schema_version", 0) != kSchemaVersion) {
    throw std::invalid_argument("unsupported explanation schema_version");
  }
  Explanation expl;
  expl.seed = doc.at("seed").get<std::uint64_t>();
  const auto measure = parse_measure(doc.at("measure").get<std::string>());
  if (!measure) throw std::invalid_argument("unknown measure in explanation");
  expl.measure = *measure;
  if (!doc.at("target_class").is_null()) expl.target_class = doc.at("target_class").get<std::size_t>();
  expl.coefficients = doc.at("coefficients").get<std::vector<double>>();
  expl.standard_errors = doc.value("standard_errors", std::vector<double>{});
  expl.intercept = doc.at("intercept").get<double>();
  expl.weighted_r2 = doc.at("weighted_r2").get<double>();
  expl.kernel_width = doc.value("kernel_width", 0.0);
  expl.config = doc.value("config", Json::object());
  expl.distances = doc.value("distances", std::vector<double>{});
  expl.sample_weights = doc.value("sample_weights", std::vector<double>{});
  return expl;
}

SuperpixelMap segments_from_json(const Json& doc) {
  const Json& seg = doc.at("segmentation");
  SuperpixelMap map;
  map.width = seg.at("width").get<std::size_t>();
  map.height = seg.at("height").get<std::size_t>();
  map.n_segments = seg.at("n_segments").get<std::size_t>();
  map.labels = seg.at("labels").get<std::vector<std::uint32_t>>();
  map.validate();
  return map;
}

}  // namespace smile

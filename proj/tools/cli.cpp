#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smile/blackbox.hpp"
#include "smile/evaluation.hpp"
#include "smile/explainers.hpp"
#include "smile/segmentation.hpp"

namespace smile::cli {
namespace {

namespace fs = std::filesystem;

// Bad user input; exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(sep, pos);
    out.push_back(trim(std::string_view(text).substr(pos, next - pos)));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& token, const std::string& field) {
  T v{};
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (token.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(field + ": '" + token + "' is not a valid number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError(field + ": values must be finite");
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& field) {
  std::vector<T> out;
  for (const auto& token : split(text, ',')) out.push_back(parse_number<T>(token, field));
  return out;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require_file(const std::string& path, const std::string& field) {
  if (path.empty()) throw ConfigError(field + ": no path given");
  if (!fs::is_regular_file(path)) throw ConfigError(field + ": file not found: " + path);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void write_json(const fs::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

// "out.json" -> "out_<suffix>"
fs::path sibling(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + "_" + suffix);
  return p;
}

DistanceMeasure measure_from(const std::string& name) {
  const auto m = parse_measure(name);
  if (!m) throw ConfigError("--measure: unknown measure '" + name + "'");
  return *m;
}

// --- tabular -------------------------------------------------------------

struct TabularOptions {
  std::string model;
  std::string point;
  std::string csv;
  std::size_t row = 0;
  std::string measure = "wasserstein";
  std::size_t n_primary = 1000;
  std::size_t m_local = 50;
  std::string sigma1;
  std::string sigma2;
  double kernel_width = 1.0;
  double lambda = 1e-6;
  std::size_t target_class = 0;
  double regularization = 1e-3;
  std::size_t bias_index = 0;
  std::size_t unrelated_index = 1;
  double bias_threshold = 0.0;
  double unrelated_threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

void add_tabular_options(CLI::App* sub, TabularOptions& o) {
  sub->add_option("--model", o.model,
                  "Black box: mars | linear:<csv> | logistic:<csv> | biased")
      ->required();
  sub->add_option("--point", o.point, "Instance to explain, comma-separated");
  sub->add_option("--csv", o.csv, "Dataset (header row, last column is the target)");
  sub->add_option("--row", o.row, "Row of the dataset to explain (0-based)");
  sub->add_option("--measure", o.measure,
                  "wasserstein | ks | kuiper | cvm | ad | euclidean | cosine")
      ->capture_default_str();
  sub->add_option("--n-primary", o.n_primary, "Primary samples N")
      ->check(CLI::Range(std::size_t{2}, kUnbounded))
      ->capture_default_str();
  sub->add_option("--m-local", o.m_local, "Local samples per primary M")
      ->check(CLI::Range(std::size_t{2}, kUnbounded))
      ->capture_default_str();
  sub->add_option("--sigma1", o.sigma1,
                  "Primary std, scalar or one per feature (> 0; default: the dataset's "
                  "feature std when a CSV is known, else 1)");
  sub->add_option("--sigma2", o.sigma2, "Local std, scalar or per feature (> 0; default sigma1/4)");
  sub->add_option("--kernel-width", o.kernel_width,
                  "Kernel width (> 0; default sqrt(2) x median distance)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--lambda", o.lambda, "Ridge penalty (>= 0)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--target-class", o.target_class,
                  "Class whose probability is explained (default: predicted class)");
  sub->add_option("--regularization", o.regularization,
                  "Penalty when fitting linear:/logistic: models (>= 0)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--bias-index", o.bias_index, "biased model: decisive feature")
      ->capture_default_str();
  sub->add_option("--unrelated-index", o.unrelated_index, "biased model: unrelated feature")
      ->capture_default_str();
  sub->add_option("--bias-threshold", o.bias_threshold, "biased model: decision threshold")
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores (never changes results)")
      ->envname("SMILE_THREADS")
      ->capture_default_str();
}

struct TabularRun {
  std::shared_ptr<TabularModel> model;
  std::vector<double> x;
  std::vector<std::string> feature_names;
  TabularExplainerConfig cfg;
};

TabularRun prepare_tabular(const CLI::App& sub, const TabularOptions& o) {
  TabularRun run;
  std::optional<CsvDataset> data;

  if (o.model == "mars") {
    run.model = std::make_shared<MarsModel>();
  } else if (o.model == "biased") {
    if (o.bias_index == o.unrelated_index) {
      throw ConfigError("--unrelated-index must differ from --bias-index");
    }
    run.model = std::make_shared<BiasedModel>(BiasedModelConfig{
        o.bias_index, o.unrelated_index, o.bias_threshold, o.unrelated_threshold});
  } else if (o.model.starts_with("linear:") || o.model.starts_with("logistic:")) {
    const bool linear = o.model.starts_with("linear:");
    const std::string path = o.model.substr(o.model.find(':') + 1);
    require_file(path, "--model");
    data = read_csv_dataset(path);
    run.model = fit_linear_model(data->features, data->targets, o.regularization,
                                 linear ? LinearTask::Regression : LinearTask::Classification);
  } else if (o.model == "square-region") {
    throw ConfigError("--model: square-region is an image model; use explain-image");
  } else {
    throw ConfigError("--model: unknown model '" + o.model +
                      "' (expected mars, linear:<csv>, logistic:<csv> or biased)");
  }

  if (sub.count("--csv") > 0) {
    require_file(o.csv, "--csv");
    data = read_csv_dataset(o.csv);
  }

  const bool has_point = sub.count("--point") > 0;
  const bool has_row = sub.count("--row") > 0;
  if (has_point == has_row) throw ConfigError("give exactly one of --point or --row");
  if (has_point) {
    run.x = parse_list<double>(o.point, "--point");
  } else {
    if (!data) throw ConfigError("--row needs --csv or a model trained from a CSV");
    if (o.row >= data->features.rows()) {
      throw ConfigError("--row " + std::to_string(o.row) + " is out of range (dataset has " +
                        std::to_string(data->features.rows()) + " rows)");
    }
    const auto r = data->features.row(o.row);
    run.x.assign(r.begin(), r.end());
  }
  const std::size_t d = run.x.size();
  if (const auto width = run.model->n_features(); width && *width != d) {
    throw ConfigError("--point: model expects " + std::to_string(*width) + " features, got " +
                      std::to_string(d));
  }
  if (o.model == "biased" && std::max(o.bias_index, o.unrelated_index) >= d) {
    throw ConfigError("--bias-index/--unrelated-index must be below the feature count " +
                      std::to_string(d));
  }
  const bool data_matches = data && data->features.cols() == d;
  if (data_matches) {
    run.feature_names = data->feature_names;
  } else {
    for (std::size_t j = 0; j < d; ++j) run.feature_names.push_back("x" + std::to_string(j + 1));
  }

  auto& p = run.cfg.perturbation;
  p.n_primary = o.n_primary;
  p.m_local = o.m_local;
  p.seed = o.seed;
  if (sub.count("--sigma1") > 0) {
    p.sigma1 = parse_list<double>(o.sigma1, "--sigma1");
  } else if (data_matches) {
    p.sigma1 = data->feature_stddev();
    for (double& s : p.sigma1) {
      if (s == 0.0) s = 1.0;
    }
  } else {
    p.sigma1 = {1.0};
  }
  if (sub.count("--sigma2") > 0) {
    p.sigma2 = parse_list<double>(o.sigma2, "--sigma2");
  } else {
    p.sigma2 = p.sigma1;
    for (double& s : p.sigma2) s *= 0.25;
  }
  try {
    p.validate(d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--") + e.what());
  }

  run.cfg.measure = measure_from(o.measure);
  if (sub.count("--kernel-width") > 0) run.cfg.kernel_width = o.kernel_width;
  run.cfg.lambda = o.lambda;
  run.cfg.threads = o.threads;
  if (run.model->output_kind() == OutputKind::Regression) {
    if (sub.count("--target-class") > 0) {
      throw ConfigError("--target-class: model '" + o.model + "' is a regressor");
    }
  } else if (sub.count("--target-class") > 0) {
    if (o.target_class >= run.model->n_outputs()) {
      throw ConfigError("--target-class must be below " + std::to_string(run.model->n_outputs()));
    }
    run.cfg.target_class = o.target_class;
  } else {
    const auto probs = run.model->predict_one(run.x);
    run.cfg.target_class =
        static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  return run;
}

void print_ranked(std::ostream& out, std::span<const double> coefficients,
                  std::span<const double> errors, const std::vector<std::string>& names,
                  std::size_t limit) {
  const auto ranked = select_top_features(coefficients, std::min(limit, coefficients.size()));
  std::size_t name_width = 7;
  for (const auto& f : ranked) name_width = std::max(name_width, names[f.index].size());
  out << std::left << std::setw(6) << "rank" << std::setw(static_cast<int>(name_width) + 2)
      << "feature" << std::right << std::setw(14) << "coefficient" << std::setw(14) << "std_error"
      << "\n";
  out << std::fixed << std::setprecision(6);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto j = ranked[r].index;
    out << std::left << std::setw(6) << r + 1 << std::setw(static_cast<int>(name_width) + 2)
        << names[j] << std::right << std::setw(14) << coefficients[j] << std::setw(14)
        << (j < errors.size() ? errors[j] : std::nan("")) << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

int cmd_explain_tabular(const CLI::App& sub, const TabularOptions& o, const std::string& out_path,
                        std::ostream& out, std::ostream& err) {
  const TabularRun run = prepare_tabular(sub, o);
  if (run.cfg.perturbation.sigma_order_suspicious()) {
    err << "warning: sigma2 exceeds sigma1; local clouds are wider than the primary spread\n";
  }
  const Explanation expl = explain_tabular(*run.model, run.x, run.cfg);
  Json doc = explanation_to_json(expl);
  doc["model"] = o.model;
  doc["feature_names"] = run.feature_names;
  write_json(out_path, doc);

  out << "measure " << measure_name(expl.measure) << ", kernel width " << expl.kernel_width
      << ", weighted R^2 " << expl.weighted_r2 << "\n";
  print_ranked(out, expl.coefficients, expl.standard_errors, run.feature_names, kUnbounded);
  out << "wrote " << out_path << "\n";
  return 0;
}

// --- stability -----------------------------------------------------------

struct StabilityOptions {
  std::size_t runs = 20;
  std::size_t k = 2;
  std::string seeds;
  bool sweep = false;
  std::string out;
  std::string coefficients;
};

std::string coefficients_csv(const StabilityReport& report, const std::vector<std::string>& names) {
  std::string text = "seed";
  for (const auto& n : names) text += "," + n;
  text += "\n";
  for (std::size_t r = 0; r < report.runs; ++r) {
    text += std::to_string(report.seeds[r]);
    for (double c : report.coefficients[r]) text += "," + format_number(c);
    text += "\n";
  }
  return text;
}

int cmd_stability(const CLI::App& sub, const TabularOptions& o, const StabilityOptions& s,
                  std::ostream& out) {
  TabularRun run = prepare_tabular(sub, o);
  std::vector<std::uint64_t> seeds;
  if (sub.count("--seeds") > 0) {
    seeds = parse_list<std::uint64_t>(s.seeds, "--seeds");
    if (sub.count("--runs") > 0 && seeds.size() != s.runs) {
      throw ConfigError("--seeds lists " + std::to_string(seeds.size()) + " seeds but --runs is " +
                        std::to_string(s.runs));
    }
  } else {
    for (std::size_t i = 0; i < s.runs; ++i) seeds.push_back(o.seed + i);
  }
  if (seeds.size() < 2) throw ConfigError("--runs must be at least 2");
  if (s.k > run.x.size()) {
    throw ConfigError("--k must not exceed the feature count " + std::to_string(run.x.size()));
  }

  std::vector<DistanceMeasure> measures{run.cfg.measure};
  if (s.sweep) {
    measures.assign(std::begin(kEcdfMeasures), std::end(kEcdfMeasures));
    measures.push_back(DistanceMeasure::Euclidean);
  }
  const fs::path base = s.out.empty() ? fs::path(s.sweep ? "stability" : "stability.json") : fs::path(s.out);

  out << std::left << std::setw(12) << "measure" << std::setw(8) << "pairs"
      << "mean_jaccard\n";
  for (const auto m : measures) {
    TabularExplainerConfig cfg = run.cfg;
    cfg.measure = m;
    const StabilityReport report =
        stability_experiment(*run.model, run.x, cfg, seeds, s.k, run.cfg.threads);
    Json doc = stability_report_to_json(report, m);
    doc["model"] = o.model;
    doc["feature_names"] = run.feature_names;
    doc["coefficients"] = report.coefficients;

    fs::path json_path = base;
    fs::path csv_path;
    const std::string name(measure_name(m));
    if (s.sweep) {
      json_path = base / ("stability_" + name + ".json");
      csv_path = base / ("coefficients_" + name + ".csv");
    } else {
      csv_path = s.coefficients.empty() ? sibling(base, "coefficients.csv") : fs::path(s.coefficients);
    }
    write_json(json_path, doc);
    write_text(csv_path, coefficients_csv(report, run.feature_names));
    out << std::left << std::setw(12) << name << std::setw(8) << report.pairwise_jaccards.size()
        << std::fixed << std::setprecision(4) << report.mean_jaccard << "\n";
    out.unsetf(std::ios::floatfield);
  }
  out << "wrote " << base.string() << "\n";
  return 0;
}

// --- image ---------------------------------------------------------------

struct ImageOptions {
  std::string image;
  std::string model = "square-region";
  std::string region;
  double threshold = 0.5;
  std::string segmentation = "slic";
  std::size_t segments = 50;
  double compactness = 10.0;
  std::size_t iterations = 10;
  std::string grid = "4x4";
  std::size_t k = 1000;
  double keep_probability = 0.5;
  std::string measure = "wasserstein";
  double kernel_width = 1.0;
  double lambda = 1e-6;
  std::size_t target_class = 1;
  std::size_t top_m = 5;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out = "explanation.json";
  std::string heatmap;
  std::string overlay;
};

void add_image_options(CLI::App* sub, ImageOptions& o) {
  sub->add_option("--image", o.image, "Input image (PNG, PPM or PGM)")->required();
  sub->add_option("--model", o.model, "Black box: square-region")->capture_default_str();
  sub->add_option("--region", o.region,
                  "square-region: x,y,width,height in pixels (default: centred half-size box)");
  sub->add_option("--threshold", o.threshold, "square-region: mean-intensity threshold")
      ->capture_default_str();
  sub->add_option("--segmentation", o.segmentation, "slic | grid")
      ->check(CLI::IsMember({"slic", "grid"}))
      ->capture_default_str();
  sub->add_option("--segments", o.segments, "slic: target segment count")
      ->check(CLI::Range(std::size_t{1}, kUnbounded))
      ->capture_default_str();
  sub->add_option("--compactness", o.compactness, "slic: compactness (> 0)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--iterations", o.iterations, "slic: iterations")
      ->check(CLI::Range(std::size_t{1}, kUnbounded))
      ->capture_default_str();
  sub->add_option("--grid", o.grid, "grid: ROWSxCOLS")->capture_default_str();
  sub->add_option("--k", o.k, "Number of masks K")
      ->check(CLI::Range(std::size_t{2}, kUnbounded))
      ->capture_default_str();
  sub->add_option("--keep-probability", o.keep_probability, "Segment keep probability in (0, 1)")
      ->capture_default_str();
  sub->add_option("--measure", o.measure,
                  "wasserstein | ks | kuiper | cvm | ad | euclidean | cosine")
      ->capture_default_str();
  sub->add_option("--kernel-width", o.kernel_width,
                  "Kernel width (> 0; default sqrt(2) x median distance)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--lambda", o.lambda, "Ridge penalty (>= 0)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--target-class", o.target_class, "Explained class")->capture_default_str();
  sub->add_option("--top-m", o.top_m, "Segments shown in the overlay")
      ->check(CLI::Range(std::size_t{1}, kUnbounded))
      ->capture_default_str();
  sub->add_option("--batch-size", o.batch_size, "Images per model call")
      ->check(CLI::Range(std::size_t{1}, kUnbounded))
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores (never changes results)")
      ->envname("SMILE_THREADS")
      ->capture_default_str();
  sub->add_option("--out", o.out, "Explanation JSON")->capture_default_str();
  sub->add_option("--heatmap", o.heatmap, "Heatmap PNG (default: <out>_heatmap.png)");
  sub->add_option("--overlay", o.overlay, "Overlay PNG (default: <out>_overlay.png)");
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("--grid: expected ROWSxCOLS, got '" + text + "'");
  const auto rows = parse_number<std::size_t>(trim(text.substr(0, x)), "--grid");
  const auto cols = parse_number<std::size_t>(trim(text.substr(x + 1)), "--grid");
  if (rows == 0 || cols == 0) throw ConfigError("--grid: rows and columns must be >= 1");
  return {rows, cols};
}

int cmd_explain_image(const CLI::App& sub, const ImageOptions& o, std::ostream& out) {
  require_file(o.image, "--image");
  if (o.model != "square-region") {
    throw ConfigError("--model: unknown image model '" + o.model + "' (expected square-region)");
  }
  if (!(o.keep_probability > 0.0 && o.keep_probability < 1.0)) {
    throw ConfigError("--keep-probability must lie in (0, 1)");
  }
  const Image img = read_image(o.image);

  PixelRect region{img.width / 4, img.height / 4, std::max<std::size_t>(1, img.width / 2),
                   std::max<std::size_t>(1, img.height / 2)};
  if (sub.count("--region") > 0) {
    const auto v = parse_list<std::size_t>(o.region, "--region");
    if (v.size() != 4) throw ConfigError("--region: expected x,y,width,height");
    region = {v[0], v[1], v[2], v[3]};
  }
  if (region.width == 0 || region.height == 0 || region.x + region.width > img.width ||
      region.y + region.height > img.height) {
    throw ConfigError("--region must be non-empty and lie inside the " + std::to_string(img.width) +
                      "x" + std::to_string(img.height) + " image");
  }
  const SquareRegionClassifier model(region, o.threshold);
  if (o.target_class >= model.n_outputs()) throw ConfigError("--target-class must be 0 or 1");

  SuperpixelMap segments;
  if (o.segmentation == "grid") {
    const auto [rows, cols] = parse_grid(o.grid);
    if (rows > img.height || cols > img.width) {
      throw ConfigError("--grid: more tiles than pixels");
    }
    segments = grid_segments(img, rows, cols);
  } else {
    segments = slic_segments(img, SlicParams{o.segments, o.compactness, o.iterations});
  }

  ImageExplainerConfig cfg;
  cfg.k_masks = o.k;
  cfg.keep_probability = o.keep_probability;
  cfg.measure = measure_from(o.measure);
  if (sub.count("--kernel-width") > 0) cfg.kernel_width = o.kernel_width;
  cfg.lambda = o.lambda;
  cfg.target_class = o.target_class;
  cfg.top_m = std::min(o.top_m, segments.n_segments);
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.batch_size = o.batch_size;

  const ImageExplanation expl = explain_image(model, img, segments, cfg);
  Json doc = image_explanation_to_json(expl, segments);
  doc["model"] = o.model;
  doc["region"] = {region.x, region.y, region.width, region.height};
  const fs::path json_path = o.out;
  write_json(json_path, doc);

  const fs::path heatmap = o.heatmap.empty() ? sibling(json_path, "heatmap.png") : fs::path(o.heatmap);
  const fs::path overlay = o.overlay.empty() ? sibling(json_path, "overlay.png") : fs::path(o.overlay);
  if (heatmap.has_parent_path()) fs::create_directories(heatmap.parent_path());
  if (overlay.has_parent_path()) fs::create_directories(overlay.parent_path());
  render_heatmap(expl.explanation, segments, heatmap);
  write_image(overlay, overlay_image(img, segments, expl.selected));

  out << segments.n_segments << " segments, " << cfg.k_masks << " masks, measure "
      << measure_name(cfg.measure) << "\n";
  std::vector<std::string> names;
  for (std::size_t s = 0; s < segments.n_segments; ++s) names.push_back("segment " + std::to_string(s));
  print_ranked(out, expl.explanation.coefficients, expl.explanation.standard_errors, names, cfg.top_m);
  out << "wrote " << json_path.string() << ", " << heatmap.string() << ", " << overlay.string()
      << "\n";
  return 0;
}

// --- evaluate ------------------------------------------------------------

struct EvaluateOptions {
  std::string explanation;
  std::string mask;
  int coi = 1;
  std::string class_map;
  std::string pixels = "thresholded";
  std::size_t unrelated_index = 0;
  std::string out;
};

void add_evaluate_options(CLI::App* sub, EvaluateOptions& o) {
  sub->add_option("--explanation", o.explanation, "Explanation JSON")->required();
  sub->add_option("--mask", o.mask, "Ground-truth label image (PNG/PGM/PPM; first channel)");
  sub->add_option("--coi", o.coi, "Class of interest in the mask (required with --mask)");
  sub->add_option("--class-map", o.class_map,
                  "Mask value to class id, e.g. \"255:1,0:0\"; unmapped values are kept");
  sub->add_option("--pixels", o.pixels,
                  "thresholded: selected segments with positive coefficients; raw: all segments")
      ->check(CLI::IsMember({"thresholded", "raw"}))
      ->capture_default_str();
  sub->add_option("--unrelated-index", o.unrelated_index,
                  "Feature index for the robustness ratio");
  sub->add_option("--out", o.out, "Metrics JSON (default: standard output)");
}

std::map<int, int> parse_class_map(const std::string& text) {
  std::map<int, int> out;
  for (const auto& entry : split(text, ',')) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("--class-map: expected value:class pairs, got '" + entry + "'");
    }
    out[parse_number<int>(trim(entry.substr(0, colon)), "--class-map")] =
        parse_number<int>(trim(entry.substr(colon + 1)), "--class-map");
  }
  return out;
}

int cmd_evaluate(const CLI::App& sub, const EvaluateOptions& o, std::ostream& out) {
  require_file(o.explanation, "--explanation");
  Json doc;
  try {
    std::ifstream in(o.explanation, std::ios::binary);
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--explanation: " + o.explanation + " is not valid JSON: " + e.what());
  }
  const Explanation expl = explanation_from_json(doc);
  const bool has_mask = sub.count("--mask") > 0;
  const bool has_unrelated = sub.count("--unrelated-index") > 0;
  if (!has_mask && !has_unrelated) throw ConfigError("evaluate needs --mask or --unrelated-index");

  Json metrics{{"schema_version", kSchemaVersion},
               {"kind", "evaluation"},
               {"measure", measure_name(expl.measure)},
               {"seed", expl.seed}};
  if (has_mask) {
    if (doc.value("kind", "") != "image") {
      throw ConfigError("--mask needs an image explanation; " + o.explanation + " is not one");
    }
    if (sub.count("--coi") == 0) throw ConfigError("--coi is required with --mask");
    require_file(o.mask, "--mask");
    const SuperpixelMap segments = segments_from_json(doc);
    const LabelImage labels = read_label_image(o.mask);
    if (labels.width != segments.width || labels.height != segments.height) {
      throw ConfigError("--mask: " + o.mask + " is " + std::to_string(labels.width) + "x" +
                        std::to_string(labels.height) + " but the explanation covers " +
                        std::to_string(segments.width) + "x" + std::to_string(segments.height));
    }
    GroundTruthMask mask{labels.width, labels.height, labels.values, o.coi};
    if (sub.count("--class-map") > 0) {
      const auto mapping = parse_class_map(o.class_map);
      for (int& v : mask.labels) {
        if (const auto it = mapping.find(v); it != mapping.end()) v = it->second;
      }
    }
    std::vector<double> pixels;
    if (o.pixels == "raw") {
      pixels = broadcast_to_pixels(expl.coefficients, segments);
    } else {
      std::vector<RankedFeature> selected;
      for (const auto& s : doc.at("selected_segments")) {
        selected.push_back({s.at("segment").get<std::size_t>(), s.at("coefficient").get<double>()});
      }
      pixels = thresholded_pixels(expl.coefficients, segments, selected);
    }
    metrics["coi"] = o.coi;
    metrics["pixels"] = o.pixels;
    metrics["coverage"] = coverage(pixels, mask);
    metrics["weighted_coverage"] = weighted_coverage(pixels, mask);
  }
  if (has_unrelated) {
    metrics["unrelated_index"] = o.unrelated_index;
    metrics["robustness_ratio"] = robustness_ratio(expl.coefficients, o.unrelated_index);
  }

  if (o.out.empty()) {
    out << metrics.dump(2) << "\n";
  } else {
    write_json(o.out, metrics);
    for (const auto* key : {"coverage", "weighted_coverage", "robustness_ratio"}) {
      if (metrics.contains(key)) out << key << " " << metrics[key].get<double>() << "\n";
    }
    out << "wrote " << o.out << "\n";
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SMILE: local explanations weighted by ECDF distances", "smile"};
  app.set_config("--config", "", "TOML configuration file; command-line flags override it");
  app.require_subcommand(1);

  TabularOptions tab;
  std::string tab_out = "explanation.json";
  auto* explain_tab = app.add_subcommand("explain-tabular", "Explain one tabular instance");
  add_tabular_options(explain_tab, tab);
  explain_tab->add_option("--out", tab_out, "Explanation JSON")->capture_default_str();

  TabularOptions stab_tab;
  StabilityOptions stab;
  auto* stability = app.add_subcommand("stability", "Top-k Jaccard stability over repeated runs");
  add_tabular_options(stability, stab_tab);
  stability->add_option("--runs", stab.runs, "Repetitions (>= 2); seeds are seed, seed+1, ...")
      ->check(CLI::Range(std::size_t{2}, kUnbounded))
      ->capture_default_str();
  stability->add_option("--k", stab.k, "Top-k features per run (>= 1)")
      ->check(CLI::Range(std::size_t{1}, kUnbounded))
      ->capture_default_str();
  stability->add_option("--seeds", stab.seeds, "Explicit distinct seeds, comma-separated");
  stability->add_flag("--sweep", stab.sweep,
                      "Run every ECDF measure and the Euclidean baseline; --out is a directory");
  stability->add_option("--out", stab.out,
                        "Report JSON (default stability.json; with --sweep a directory, default "
                        "stability/)");
  stability->add_option("--coefficients", stab.coefficients,
                        "Per-run coefficient CSV (default: <out>_coefficients.csv)");

  ImageOptions img;
  auto* explain_img = app.add_subcommand("explain-image", "Explain an image classifier decision");
  add_image_options(explain_img, img);

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Coverage and robustness metrics for a saved explanation");
  add_evaluate_options(evaluate, eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (explain_tab->parsed()) return cmd_explain_tabular(*explain_tab, tab, tab_out, out, err);
    if (stability->parsed()) return cmd_stability(*stability, stab_tab, stab, out);
    if (explain_img->parsed()) return cmd_explain_image(*explain_img, img, out);
    if (evaluate->parsed()) return cmd_evaluate(*evaluate, eval, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace smile::cli

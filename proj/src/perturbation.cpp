#include "smile/perturbation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "smile/random.hpp"

namespace smile {
namespace {

void validate_sigma(const std::vector<double>& sigma, std::size_t n_features, const char* name) {
  if (sigma.size() != 1 && sigma.size() != n_features) {
    throw std::invalid_argument(std::string(name) + " must have 1 or " +
                                std::to_string(n_features) + " entries");
  }
  for (double s : sigma) {
    if (!std::isfinite(s) || s <= 0.0) {
      throw std::invalid_argument(std::string(name) + " must be positive and finite");
    }
  }
}

double sigma_at(const std::vector<double>& sigma, std::size_t j) {
  return sigma.size() == 1 ? sigma.front() : sigma[j];
}

void fill_gaussian(Rng& rng, std::span<const double> center, const std::vector<double>& sigma,
                   std::span<double> out) {
  for (std::size_t j = 0; j < center.size(); ++j) {
    out[j] = rng.normal(center[j], sigma_at(sigma, j));
  }
}

}  // namespace

void TabularPerturbationConfig::validate(std::size_t n_features) const {
  if (n_features == 0) throw std::invalid_argument("feature vector is empty");
  if (n_primary < 2) throw std::invalid_argument("n_primary must be >= 2");
  if (m_local < 2) throw std::invalid_argument("m_local must be >= 2");
  validate_sigma(sigma1, n_features, "sigma1");
  validate_sigma(sigma2, n_features, "sigma2");
}

bool TabularPerturbationConfig::sigma_order_suspicious() const {
  return sigma1.size() == 1 && sigma2.size() == 1 && sigma2.front() >= sigma1.front();
}

PerturbationSet perturb_tabular(std::span<const double> x, const TabularPerturbationConfig& cfg) {
  const std::size_t d = x.size();
  cfg.validate(d);
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }

  PerturbationSet set;
  set.origin.assign(x.begin(), x.end());
  set.m_local = cfg.m_local;
  set.origin_locals = Matrix(cfg.m_local, d);
  set.primaries = Matrix(cfg.n_primary, d);
  set.locals = Matrix(cfg.n_primary * cfg.m_local, d);

  Rng rng(cfg.seed);
  for (std::size_t j = 0; j < cfg.m_local; ++j) {
    fill_gaussian(rng, x, cfg.sigma2, set.origin_locals.row(j));
  }
  for (std::size_t i = 0; i < cfg.n_primary; ++i) {
    fill_gaussian(rng, x, cfg.sigma1, set.primaries.row(i));
  }
  for (std::size_t i = 0; i < cfg.n_primary; ++i) {
    const auto center = set.primaries.row(i);
    for (std::size_t j = 0; j < cfg.m_local; ++j) {
      fill_gaussian(rng, center, cfg.sigma2, set.locals.row(i * cfg.m_local + j));
    }
  }
  return set;
}

MaskSet generate_masks(std::size_t n_segments, std::size_t k, double keep_probability,
                       std::uint64_t seed) {
  if (n_segments < 1) throw std::invalid_argument("n_segments must be >= 1");
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  if (!(keep_probability > 0.0 && keep_probability < 1.0)) {
    throw std::invalid_argument("keep_probability must lie in (0, 1)");
  }
  MaskSet set;
  set.n_segments = n_segments;
  set.keep_probability = keep_probability;
  set.masks.reserve(k);
  set.masks.emplace_back(n_segments, std::uint8_t{1});
  Rng rng(seed);
  for (std::size_t m = 1; m < k; ++m) {
    std::vector<std::uint8_t> mask(n_segments);
    for (auto& bit : mask) bit = rng.bernoulli(keep_probability) ? 1 : 0;
    set.masks.push_back(std::move(mask));
  }
  return set;
}

Image apply_mask(const Image& image, const SuperpixelMap& segments,
                 std::span<const std::uint8_t> mask) {
  if (image.width != segments.width || image.height != segments.height) {
    throw std::invalid_argument("image and segment map dimensions differ");
  }
  if (mask.size() != segments.n_segments) {
    throw std::invalid_argument("mask length does not match segment count");
  }
  const std::vector<double> fill = image.channel_means();
  Image out = image;
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    if (mask[segments.labels[p]] != 0) continue;
    for (std::size_t c = 0; c < image.channels; ++c) out.data[p * image.channels + c] = fill[c];
  }
  return out;
}

}  // namespace smile

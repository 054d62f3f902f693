#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smile/image.hpp"
#include "smile/matrix.hpp"

namespace smile {

struct TabularPerturbationConfig {
  std::size_t n_primary = 1000;
  std::size_t m_local = 50;
  // One entry broadcasts to every feature; otherwise one entry per feature.
  std::vector<double> sigma1{1.0};
  std::vector<double> sigma2{0.25};
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on an invalid config.
  void validate(std::size_t n_features) const;
  // True when a scalar sigma2 is not smaller than a scalar sigma1. Allowed,
  // but worth a warning.
  bool sigma_order_suspicious() const;
};

/// Two-stage Gaussian sample cloud around one instance.
///
/// Local samples of primary i occupy rows [i*M, (i+1)*M) of `locals`.
struct PerturbationSet {
  std::vector<double> origin;
  Matrix primaries;       // N x d
  Matrix locals;          // (N*M) x d
  Matrix origin_locals;   // M x d
  std::size_t m_local = 0;

  std::size_t n_primary() const { return primaries.rows(); }
  std::size_t dims() const { return origin.size(); }
  MatrixView locals_of(std::size_t i) const { return locals.block(i * m_local, m_local); }

  bool operator==(const PerturbationSet&) const = default;
};

/// Draw order is fixed: origin locals, then all primaries, then the locals of
/// each primary in turn.
PerturbationSet perturb_tabular(std::span<const double> x, const TabularPerturbationConfig& cfg);

struct MaskSet {
  std::size_t n_segments = 0;
  double keep_probability = 0.5;
  // masks[0] is all ones.
  std::vector<std::vector<std::uint8_t>> masks;

  std::size_t k() const { return masks.size(); }
  bool operator==(const MaskSet&) const = default;
};

MaskSet generate_masks(std::size_t n_segments, std::size_t k, double keep_probability,
                       std::uint64_t seed);

/// Keeps the segments whose mask bit is 1 and paints the others with the
/// per-channel mean color of the whole image.
Image apply_mask(const Image& image, const SuperpixelMap& segments,
                 std::span<const std::uint8_t> mask);

}  // namespace smile

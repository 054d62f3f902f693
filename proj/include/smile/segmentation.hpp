#pragma once

#include <cstddef>

#include "smile/image.hpp"

namespace smile {

struct SlicParams {
  std::size_t target_segments = 50;
  double compactness = 10.0;
  std::size_t iterations = 10;
};

/// SLIC superpixels: k-means over (color, position) with a compactness
/// trade-off, followed by a pass that folds every disconnected fragment of a
/// cluster into the neighbouring segment it shares the longest border with.
/// Seeding is a deterministic grid, so equal inputs give equal maps.
SuperpixelMap slic_segments(const Image& img, const SlicParams& params = {});

/// rows x cols rectangular tiles, labelled in row-major tile order. Leading
/// tiles absorb the remainder, so tile sizes differ by at most one pixel per
/// dimension.
SuperpixelMap grid_segments(const Image& img, std::size_t rows, std::size_t cols);
SuperpixelMap grid_segments(std::size_t width, std::size_t height, std::size_t rows,
                            std::size_t cols);

/// Number of 4-connected components per segment id.
std::vector<std::size_t> component_counts(const SuperpixelMap& map);

}  // namespace smile

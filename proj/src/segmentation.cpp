#include "smile/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace smile {
namespace {

// SLIC distances are computed with intensities stretched to [0, 100], the
// range of CIELAB lightness, so the customary compactness of ~10 applies.
constexpr double kColorScale = 100.0;

struct Center {
  double x = 0.0;
  double y = 0.0;
  std::vector<double> color;
};

double color_dist2(const Image& img, std::size_t p, const std::vector<double>& color) {
  double acc = 0.0;
  for (std::size_t c = 0; c < img.channels; ++c) {
    const double d = kColorScale * img.data[p * img.channels + c] - color[c];
    acc += d * d;
  }
  return acc;
}

double gradient_at(const Image& img, std::size_t x, std::size_t y) {
  if (x == 0 || y == 0 || x + 1 >= img.width || y + 1 >= img.height) {
    return std::numeric_limits<double>::infinity();
  }
  double g = 0.0;
  for (std::size_t c = 0; c < img.channels; ++c) {
    const double dx = img.at(x + 1, y, c) - img.at(x - 1, y, c);
    const double dy = img.at(x, y + 1, c) - img.at(x, y - 1, c);
    g += dx * dx + dy * dy;
  }
  return g;
}

struct Components {
  std::vector<std::uint32_t> id;           // per pixel component id
  std::vector<std::uint32_t> label;        // per component cluster label
  std::vector<std::size_t> size;           // per component pixel count
};

Components label_components(std::size_t width, std::size_t height,
                            const std::vector<std::uint32_t>& labels) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  Components comps;
  comps.id.assign(labels.size(), kUnset);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (comps.id[start] != kUnset) continue;
    const auto cid = static_cast<std::uint32_t>(comps.label.size());
    const std::uint32_t lab = labels[start];
    comps.label.push_back(lab);
    comps.size.push_back(0);
    comps.id[start] = cid;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++comps.size[cid];
      const std::size_t x = p % width;
      const std::size_t y = p / width;
      const auto visit = [&](std::size_t q) {
        if (comps.id[q] == kUnset && labels[q] == lab) {
          comps.id[q] = cid;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < width) visit(p + 1);
      if (y > 0) visit(p - width);
      if (y + 1 < height) visit(p + width);
    }
  }
  return comps;
}

// Keeps the largest component of every label and merges the remaining
// fragments into the adjacent kept segment with the longest shared border,
// then renumbers labels in raster order of first appearance.
void enforce_connectivity(std::size_t width, std::size_t height,
                          std::vector<std::uint32_t>& labels) {
  const Components comps = label_components(width, height, labels);
  const std::size_t n_comp = comps.label.size();

  std::map<std::uint32_t, std::uint32_t> largest;  // label -> component
  for (std::uint32_t c = 0; c < n_comp; ++c) {
    auto [it, inserted] = largest.try_emplace(comps.label[c], c);
    if (!inserted && comps.size[c] > comps.size[it->second]) it->second = c;
  }
  std::vector<bool> settled(n_comp, false);
  std::vector<std::uint32_t> final_label(comps.label);
  for (const auto& [lab, c] : largest) settled[c] = true;

  bool pending = true;
  while (pending) {
    pending = false;
    std::vector<std::map<std::uint32_t, std::size_t>> borders(n_comp);
    for (std::size_t p = 0; p < labels.size(); ++p) {
      const std::uint32_t c = comps.id[p];
      if (settled[c]) continue;
      const std::size_t x = p % width;
      const std::size_t y = p / width;
      const auto touch = [&](std::size_t q) {
        const std::uint32_t other = comps.id[q];
        if (other != c && settled[other]) ++borders[c][final_label[other]];
      };
      if (x > 0) touch(p - 1);
      if (x + 1 < width) touch(p + 1);
      if (y > 0) touch(p - width);
      if (y + 1 < height) touch(p + width);
    }
    std::vector<std::uint32_t> resolved;
    for (std::uint32_t c = 0; c < n_comp; ++c) {
      if (settled[c]) continue;
      if (borders[c].empty()) {
        pending = true;
        continue;
      }
      auto best = borders[c].begin();
      for (auto it = borders[c].begin(); it != borders[c].end(); ++it) {
        if (it->second > best->second) best = it;
      }
      final_label[c] = best->first;
      resolved.push_back(c);
    }
    for (auto c : resolved) settled[c] = true;
    if (pending && resolved.empty()) break;  // unreachable for a connected grid
  }

  std::map<std::uint32_t, std::uint32_t> renumber;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const std::uint32_t lab = final_label[comps.id[p]];
    auto [it, inserted] = renumber.try_emplace(lab, static_cast<std::uint32_t>(renumber.size()));
    labels[p] = it->second;
  }
}

}  // namespace

SuperpixelMap slic_segments(const Image& img, const SlicParams& params) {
  img.validate();
  const std::size_t width = img.width;
  const std::size_t height = img.height;
  const std::size_t n_pixels = width * height;
  if (params.target_segments < 1) throw std::invalid_argument("target_segments must be >= 1");
  if (params.target_segments > n_pixels) {
    throw std::invalid_argument("target_segments exceeds pixel count");
  }
  if (!(params.compactness > 0.0)) throw std::invalid_argument("compactness must be positive");
  if (params.iterations < 1) throw std::invalid_argument("iterations must be >= 1");

  const double k = static_cast<double>(params.target_segments);
  const auto ny = static_cast<std::size_t>(std::clamp<double>(
      std::round(std::sqrt(k * static_cast<double>(height) / static_cast<double>(width))), 1.0,
      static_cast<double>(height)));
  const auto nx = static_cast<std::size_t>(std::clamp<double>(
      std::round(k / static_cast<double>(ny)), 1.0, static_cast<double>(width)));
  const double step_x = static_cast<double>(width) / static_cast<double>(nx);
  const double step_y = static_cast<double>(height) / static_cast<double>(ny);
  const double spacing = std::sqrt(static_cast<double>(n_pixels) / static_cast<double>(nx * ny));
  const auto window = static_cast<long>(std::ceil(std::max(step_x, step_y)));
  const double spatial_weight = (params.compactness / spacing) * (params.compactness / spacing);

  std::vector<Center> centers;
  centers.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      auto px = static_cast<std::size_t>(std::lround((static_cast<double>(i) + 0.5) * step_x - 0.5));
      auto py = static_cast<std::size_t>(std::lround((static_cast<double>(j) + 0.5) * step_y - 0.5));
      px = std::min(px, width - 1);
      py = std::min(py, height - 1);
      if (spacing >= 3.0) {
        // Nudge the seed off edges: lowest gradient in the 3x3 neighbourhood.
        double best = gradient_at(img, px, py);
        std::size_t bx = px, by = py;
        for (std::size_t yy = (py > 0 ? py - 1 : 0); yy <= std::min(py + 1, height - 1); ++yy) {
          for (std::size_t xx = (px > 0 ? px - 1 : 0); xx <= std::min(px + 1, width - 1); ++xx) {
            const double g = gradient_at(img, xx, yy);
            if (g < best) {
              best = g;
              bx = xx;
              by = yy;
            }
          }
        }
        px = bx;
        py = by;
      }
      Center c;
      c.x = static_cast<double>(px);
      c.y = static_cast<double>(py);
      c.color.resize(img.channels);
      for (std::size_t ch = 0; ch < img.channels; ++ch) c.color[ch] = kColorScale * img.at(px, py, ch);
      centers.push_back(std::move(c));
    }
  }

  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> labels(n_pixels, kNone);
  std::vector<double> best(n_pixels);
  const auto distance2 = [&](std::size_t p, const Center& c) {
    const double dx = static_cast<double>(p % width) - c.x;
    const double dy = static_cast<double>(p / width) - c.y;
    return color_dist2(img, p, c.color) + (dx * dx + dy * dy) * spatial_weight;
  };

  for (std::size_t iter = 0; iter < params.iterations; ++iter) {
    std::fill(labels.begin(), labels.end(), kNone);
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    for (std::uint32_t ci = 0; ci < centers.size(); ++ci) {
      const Center& c = centers[ci];
      const long cx = std::lround(c.x);
      const long cy = std::lround(c.y);
      const long x0 = std::max(0L, cx - window);
      const long x1 = std::min(static_cast<long>(width) - 1, cx + window);
      const long y0 = std::max(0L, cy - window);
      const long y1 = std::min(static_cast<long>(height) - 1, cy + window);
      for (long y = y0; y <= y1; ++y) {
        for (long x = x0; x <= x1; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
          const double d = distance2(p, c);
          if (d < best[p]) {
            best[p] = d;
            labels[p] = ci;
          }
        }
      }
    }
    // Pixels outside every window fall back to the globally nearest center.
    for (std::size_t p = 0; p < n_pixels; ++p) {
      if (labels[p] != kNone) continue;
      for (std::uint32_t ci = 0; ci < centers.size(); ++ci) {
        const double d = distance2(p, centers[ci]);
        if (d < best[p]) {
          best[p] = d;
          labels[p] = ci;
        }
      }
    }
    std::vector<Center> sums(centers.size());
    std::vector<std::size_t> counts(centers.size(), 0);
    for (auto& s : sums) s.color.assign(img.channels, 0.0);
    for (std::size_t p = 0; p < n_pixels; ++p) {
      Center& s = sums[labels[p]];
      s.x += static_cast<double>(p % width);
      s.y += static_cast<double>(p / width);
      for (std::size_t ch = 0; ch < img.channels; ++ch) {
        s.color[ch] += kColorScale * img.data[p * img.channels + ch];
      }
      ++counts[labels[p]];
    }
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      if (counts[ci] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[ci]);
      centers[ci].x = sums[ci].x * inv;
      centers[ci].y = sums[ci].y * inv;
      for (std::size_t ch = 0; ch < img.channels; ++ch) centers[ci].color[ch] = sums[ci].color[ch] * inv;
    }
  }

  enforce_connectivity(width, height, labels);
  SuperpixelMap map;
  map.width = width;
  map.height = height;
  map.n_segments = *std::max_element(labels.begin(), labels.end()) + 1;
  map.labels = std::move(labels);
  return map;
}

SuperpixelMap grid_segments(std::size_t width, std::size_t height, std::size_t rows,
                            std::size_t cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid needs at least one row and column");
  if (rows > height || cols > width) {
    throw std::invalid_argument("grid has more tiles than pixels along an axis");
  }
  // Tile index along an axis: the first (extent % tiles) tiles are one longer.
  const auto tile_of = [](std::size_t pos, std::size_t extent, std::size_t tiles) {
    const std::size_t base = extent / tiles;
    const std::size_t extra = extent % tiles;
    const std::size_t long_span = extra * (base + 1);
    return pos < long_span ? pos / (base + 1) : extra + (pos - long_span) / base;
  };
  SuperpixelMap map;
  map.width = width;
  map.height = height;
  map.n_segments = rows * cols;
  map.labels.resize(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t r = tile_of(y, height, rows);
    for (std::size_t x = 0; x < width; ++x) {
      map.labels[y * width + x] = static_cast<std::uint32_t>(r * cols + tile_of(x, width, cols));
    }
  }
  return map;
}

SuperpixelMap grid_segments(const Image& img, std::size_t rows, std::size_t cols) {
  return grid_segments(img.width, img.height, rows, cols);
}

std::vector<std::size_t> component_counts(const SuperpixelMap& map) {
  const Components comps = label_components(map.width, map.height, map.labels);
  std::vector<std::size_t> counts(map.n_segments, 0);
  for (auto lab : comps.label) {
    if (lab < counts.size()) ++counts[lab];
  }
  return counts;
}

}  // namespace smile

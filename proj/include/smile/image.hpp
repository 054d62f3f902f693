#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace smile {

// Row-major, channel-interleaved image with intensities in [0, 1].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<double> data;

  static Image filled(std::size_t width, std::size_t height, std::size_t channels, double value);

  std::size_t pixel_count() const { return width * height; }
  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return data[(y * width + x) * channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return data[(y * width + x) * channels + c];
  }
  bool same_shape(const Image& other) const {
    return width == other.width && height == other.height && channels == other.channels;
  }
  // Throws std::invalid_argument if the invariants do not hold.
  void validate() const;
  // Per-channel mean over all pixels.
  std::vector<double> channel_means() const;
  // All intensities of channel c, in pixel order.
  std::vector<double> channel(std::size_t c) const;

  bool operator==(const Image&) const = default;
};

struct SuperpixelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> labels;
  std::size_t n_segments = 0;

  std::uint32_t at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }
  std::vector<std::size_t> segment_sizes() const;
  // Every label < n_segments and every id in [0, n_segments) used.
  void validate() const;

  bool operator==(const SuperpixelMap&) const = default;
};

class UnsupportedImageFormat : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reads PNG, PPM (P3/P6) or PGM (P2/P5), detected from the file header.
/// Alpha is dropped; palette and 16-bit PNGs are expanded.
Image read_image(const std::filesystem::path& path);

/// Raw integer samples of the first channel (0..255 or 0..65535), for label
/// masks where intensities are class ids rather than brightness.
struct LabelImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<int> values;
};
LabelImage read_label_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& img);
void write_pnm(const std::filesystem::path& path, const Image& img);
// Chooses the writer from the extension (.png, .ppm, .pgm).
void write_image(const std::filesystem::path& path, const Image& img);

}  // namespace smile

#include "smile/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace smile {

Image Image::filled(std::size_t width, std::size_t height, std::size_t channels, double value) {
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(width * height * channels, value);
  return img;
}

void Image::validate() const {
  if (width == 0 || height == 0) throw std::invalid_argument("image has zero size");
  if (channels != 1 && channels != 3) throw std::invalid_argument("image must have 1 or 3 channels");
  if (data.size() != width * height * channels) {
    throw std::invalid_argument("image data size does not match its shape");
  }
  for (double v : data) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("image intensity outside [0, 1]");
  }
}

std::vector<double> Image::channel_means() const {
  std::vector<double> sums(channels, 0.0);
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    for (std::size_t c = 0; c < channels; ++c) sums[c] += data[p * channels + c];
  }
  for (double& s : sums) s /= static_cast<double>(pixel_count());
  return sums;
}

std::vector<double> Image::channel(std::size_t c) const {
  std::vector<double> out(pixel_count());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = data[p * channels + c];
  return out;
}

std::vector<std::size_t> SuperpixelMap::segment_sizes() const {
  std::vector<std::size_t> sizes(n_segments, 0);
  for (auto l : labels) {
    if (l < n_segments) ++sizes[l];
  }
  return sizes;
}

void SuperpixelMap::validate() const {
  if (labels.size() != width * height) {
    throw std::invalid_argument("label count does not match map dimensions");
  }
  if (n_segments == 0) throw std::invalid_argument("segment map has no segments");
  for (auto l : labels) {
    if (l >= n_segments) throw std::invalid_argument("segment label out of range");
  }
  for (std::size_t s : segment_sizes()) {
    if (s == 0) throw std::invalid_argument("segment id range is not contiguous");
  }
}

namespace {

enum class Format { Png, Pnm, Unknown };

Format sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image '" + path.string() + "'");
  unsigned char head[8] = {};
  in.read(reinterpret_cast<char*>(head), sizeof(head));
  if (in.gcount() >= 8 && png_sig_cmp(head, 0, 8) == 0) return Format::Png;
  if (in.gcount() >= 2 && head[0] == 'P' &&
      (head[1] == '2' || head[1] == '3' || head[1] == '5' || head[1] == '6')) {
    return Format::Pnm;
  }
  return Format::Unknown;
}

struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  unsigned maxval = 255;
  std::vector<unsigned> samples;
};

RawImage read_png_raw(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw std::runtime_error("cannot read PNG '" + path.string() + "': " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw std::runtime_error("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  RawImage raw;
  raw.width = image.width;
  raw.height = image.height;
  raw.channels = color ? 3 : 1;
  raw.samples.assign(buffer.begin(), buffer.end());
  return raw;
}

// Netpbm header token, skipping whitespace and '#' comments.
unsigned read_pnm_number(std::istream& in) {
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = in.get();
  }
  if (ch == EOF || !std::isdigit(ch)) throw std::runtime_error("malformed netpbm header");
  unsigned value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + static_cast<unsigned>(ch - '0');
    ch = in.get();
  }
  return value;
}

RawImage read_pnm_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[2];
  in.read(magic, 2);
  const char kind = magic[1];
  RawImage raw;
  raw.channels = (kind == '3' || kind == '6') ? 3 : 1;
  raw.width = read_pnm_number(in);
  raw.height = read_pnm_number(in);
  raw.maxval = read_pnm_number(in);
  if (raw.width == 0 || raw.height == 0 || raw.maxval == 0 || raw.maxval > 65535) {
    throw std::runtime_error("malformed netpbm header in '" + path.string() + "'");
  }
  const std::size_t count = raw.width * raw.height * raw.channels;
  raw.samples.resize(count);
  if (kind == '5' || kind == '6') {
    // Exactly one whitespace byte after maxval was consumed by read_pnm_number.
    const std::size_t bytes = raw.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(count * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
      throw std::runtime_error("truncated netpbm data in '" + path.string() + "'");
    }
    for (std::size_t i = 0; i < count; ++i) {
      raw.samples[i] = bytes == 2 ? (unsigned{buf[2 * i]} << 8) | buf[2 * i + 1] : buf[i];
    }
  } else {
    for (auto& s : raw.samples) s = read_pnm_number(in);
  }
  for (auto s : raw.samples) {
    if (s > raw.maxval) throw std::runtime_error("netpbm sample exceeds maxval");
  }
  return raw;
}

RawImage read_raw(const std::filesystem::path& path) {
  switch (sniff(path)) {
    case Format::Png:
      return read_png_raw(path);
    case Format::Pnm:
      return read_pnm_raw(path);
    case Format::Unknown:
      break;
  }
  throw UnsupportedImageFormat("unsupported image format: '" + path.string() +
                               "' (expected PNG, PPM or PGM)");
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  const RawImage raw = read_raw(path);
  Image img;
  img.width = raw.width;
  img.height = raw.height;
  img.channels = raw.channels;
  img.data.resize(raw.samples.size());
  const double maxval = static_cast<double>(raw.maxval);
  std::transform(raw.samples.begin(), raw.samples.end(), img.data.begin(),
                 [maxval](unsigned s) { return static_cast<double>(s) / maxval; });
  return img;
}

LabelImage read_label_image(const std::filesystem::path& path) {
  const RawImage raw = read_raw(path);
  LabelImage out;
  out.width = raw.width;
  out.height = raw.height;
  out.values.resize(raw.width * raw.height);
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    out.values[p] = static_cast<int>(raw.samples[p * raw.channels]);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  img.validate();
  std::vector<png_byte> bytes(img.data.size());
  std::transform(img.data.begin(), img.data.end(), bytes.begin(), to_byte);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

void write_pnm(const std::filesystem::path& path, const Image& img) {
  img.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  for (double v : img.data) out.put(static_cast<char>(to_byte(v)));
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void write_image(const std::filesystem::path& path, const Image& img) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return write_png(path, img);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return write_pnm(path, img);
  throw UnsupportedImageFormat("unsupported output image format: '" + path.string() + "'");
}

}  // namespace smile

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "smile/image.hpp"

using namespace smile;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "smile_image_tests";
  fs::create_directories(dir);
  return dir / name;
}

Image gradient(std::size_t w, std::size_t h, std::size_t channels) {
  Image img = Image::filled(w, h, channels, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        img.at(x, y, c) = static_cast<double>((x * 37 + y * 11 + c * 101) % 256) / 255.0;
      }
    }
  }
  return img;
}

}  // namespace

TEST(Image, Validation) {
  EXPECT_NO_THROW(Image::filled(2, 2, 3, 0.5).validate());
  Image bad = Image::filled(2, 2, 1, 0.5);
  bad.data[0] = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = Image::filled(2, 2, 2, 0.5);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = Image::filled(2, 2, 1, 0.5);
  bad.data.pop_back();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Image, ChannelMeans) {
  Image img = Image::filled(2, 1, 3, 0.0);
  img.at(0, 0, 0) = 1.0;
  img.at(1, 0, 2) = 0.5;
  const auto m = img.channel_means();
  EXPECT_DOUBLE_EQ(m[0], 0.5);
  EXPECT_DOUBLE_EQ(m[1], 0.0);
  EXPECT_DOUBLE_EQ(m[2], 0.25);
  EXPECT_EQ(img.channel(0), (std::vector<double>{1.0, 0.0}));
}

TEST(ImageIo, PngRoundTrip) {
  for (std::size_t channels : {1u, 3u}) {
    const Image img = gradient(13, 7, channels);
    const auto path = temp_path("rt" + std::to_string(channels) + ".png");
    write_png(path, img);
    EXPECT_EQ(read_image(path), img);
  }
}

TEST(ImageIo, PnmRoundTrip) {
  const Image rgb = gradient(5, 9, 3);
  write_pnm(temp_path("rt.ppm"), rgb);
  EXPECT_EQ(read_image(temp_path("rt.ppm")), rgb);
  const Image gray = gradient(6, 4, 1);
  write_image(temp_path("rt.pgm"), gray);
  EXPECT_EQ(read_image(temp_path("rt.pgm")), gray);
}

TEST(ImageIo, AsciiPgmWithComments) {
  const auto path = temp_path("ascii.pgm");
  std::ofstream(path) << "P2\n# comment\n2 2\n4\n0 1\n2 4\n";
  const Image img = read_image(path);
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.channels, 1u);
  EXPECT_EQ(img.data, (std::vector<double>{0.0, 0.25, 0.5, 1.0}));
  const LabelImage labels = read_label_image(path);
  EXPECT_EQ(labels.values, (std::vector<int>{0, 1, 2, 4}));
}

TEST(ImageIo, UnsupportedFormat) {
  const auto path = temp_path("not_an_image.bmp");
  std::ofstream(path) << "BM this is not supported";
  EXPECT_THROW(read_image(path), UnsupportedImageFormat);
  EXPECT_THROW(write_image(temp_path("out.gif"), Image::filled(1, 1, 1, 0.0)),
               UnsupportedImageFormat);
}

TEST(ImageIo, MissingFile) {
  EXPECT_THROW(read_image(temp_path("does_not_exist.png")), std::runtime_error);
}

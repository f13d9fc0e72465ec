#include "patchcluster/heatmap.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

#include "patchcluster/error.hpp"

namespace patchcluster::viz {

namespace {

constexpr std::uint8_t kViridis[17][3] = {
    {68, 1, 84},    {72, 24, 106},  {71, 45, 123},  {66, 64, 134},  {59, 82, 139},
    {51, 99, 141},  {44, 114, 142}, {38, 130, 142}, {33, 145, 140}, {31, 160, 136},
    {40, 174, 128}, {63, 188, 115}, {94, 201, 98},  {132, 212, 75}, {173, 220, 48},
    {216, 226, 25}, {253, 231, 37}};

}  // namespace

void viridis(double t, std::uint8_t out[3]) noexcept {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * 16.0;
  const auto lo = std::min<std::size_t>(15, static_cast<std::size_t>(t));
  const double f = t - static_cast<double>(lo);
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<std::uint8_t>(
        std::lround((1.0 - f) * kViridis[lo][c] + f * kViridis[lo + 1][c]));
  }
}

RgbImage resize_rgb(const RgbImage& image, std::size_t height, std::size_t width) {
  if (image.height == 0 || image.width == 0) {
    fail(Errc::invalid_argument, "cannot resize an empty image");
  }
  RgbImage out{height, width, std::vector<std::uint8_t>(height * width * 3)};
  auto coord = [](std::size_t i, std::size_t in, std::size_t n) {
    return n > 1 ? static_cast<double>(i) * static_cast<double>(in - 1) /
                       static_cast<double>(n - 1)
                 : 0.0;
  };
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = coord(y, image.height, height);
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(image.height - 1, y0 + 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx = coord(x, image.width, width);
      const auto x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(image.width - 1, x0 + 1);
      const double fx = sx - static_cast<double>(x0);
      for (int c = 0; c < 3; ++c) {
        auto px = [&](std::size_t yy, std::size_t xx) {
          return static_cast<double>(image.rgb[(yy * image.width + xx) * 3 + c]);
        };
        const double v = (1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x1)) +
                         fy * ((1 - fx) * px(y1, x0) + fx * px(y1, x1));
        out.rgb[(y * width + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

RgbImage render_heatmap(const ScalarImage& scores, const RgbImage* background,
                        double alpha) {
  RgbImage out{scores.height, scores.width,
               std::vector<std::uint8_t>(scores.height * scores.width * 3)};
  if (scores.data.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(scores.data.begin(), scores.data.end());
  const double lo = *lo_it, span = *hi_it - *lo_it;

  RgbImage bg;
  if (background != nullptr) bg = resize_rgb(*background, scores.height, scores.width);

  for (std::size_t i = 0; i < scores.data.size(); ++i) {
    const double t = span > 0.0 ? (scores.data[i] - lo) / span : 0.0;
    std::uint8_t c[3];
    viridis(t, c);
    for (int k = 0; k < 3; ++k) {
      double v = c[k];
      if (background != nullptr) v = alpha * v + (1.0 - alpha) * bg.rgb[i * 3 + k];
      out.rgb[i * 3 + k] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return out;
}

RgbImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    fail(Errc::io_failure, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out{image.height, image.width,
               std::vector<std::uint8_t>(PNG_IMAGE_SIZE(image))};
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(Errc::io_failure, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.rgb.data(), 0, nullptr)) {
    fail(Errc::io_failure, "cannot write PNG " + path.string() + ": " + image.message);
  }
}

}  // namespace patchcluster::viz

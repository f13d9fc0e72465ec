#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "patchcluster/grid.hpp"

namespace patchcluster::viz {

/// Interleaved 8-bit RGB, row-major.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> rgb;
};

/// Viridis colour for t in [0, 1] (17-point piecewise-linear table).
void viridis(double t, std::uint8_t out[3]) noexcept;

/// Per-image min-max normalization, viridis colouring, and an alpha blend
/// over `background` (resized bilinearly to the score map) when given.
RgbImage render_heatmap(const ScalarImage& scores, const RgbImage* background,
                        double alpha = 0.5);

RgbImage resize_rgb(const RgbImage& image, std::size_t height, std::size_t width);

RgbImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace patchcluster::viz

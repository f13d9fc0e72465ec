#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "patchcluster/grid.hpp"

namespace patchcluster::features {

/// One backbone stage's output for one image.
struct LayerFeatureMap {
  int stage_id = 0;
  VectorGrid grid;
};

/// Multi-scale, locally pooled patch features for one image: one D-vector
/// per location of the finest input grid.
struct PatchFeatureMap {
  std::string image_id;
  VectorGrid grid;

  std::size_t width() const noexcept { return grid.width; }
  std::size_t height() const noexcept { return grid.height; }
  std::size_t dim() const noexcept { return grid.channels; }
};

inline constexpr std::size_t kDefaultPoolSize = 3;

/// Bilinear resampling with corner-aligned coordinates: output index i maps
/// to input coordinate i * (in - 1) / (out - 1) (0 when out == 1). Applied
/// per channel.
VectorGrid bilinear_resize(const VectorGrid& map, std::size_t out_width,
                           std::size_t out_height);

/// Resizes every layer to the first layer's grid and concatenates channels
/// in input order.
PatchFeatureMap align_and_concat(std::span<const LayerFeatureMap> layers,
                                 std::string image_id = {});

/// Mean over the in-bounds part of the patch_size x patch_size window
/// centred on each location (stride 1). patch_size must be odd.
PatchFeatureMap local_average_pool(const PatchFeatureMap& map,
                                   std::size_t patch_size);

/// Reads a W x H x C float tensor as one stage map.
LayerFeatureMap load_layer(const std::filesystem::path& path, int stage_id);

/// load_layer for each path, align_and_concat, then local_average_pool.
PatchFeatureMap load_patch_features(
    std::span<const std::filesystem::path> stage_paths, std::string image_id,
    std::size_t patch_size = kDefaultPoolSize);

/// Writes a grid as a W x H x C float tensor.
void save_grid(const std::filesystem::path& path, const VectorGrid& grid);

}  // namespace patchcluster::features

#pragma once

#include <cstddef>

#include "patchcluster/grid.hpp"

namespace patchcluster::scoring {

/// Corner-aligned bilinear upsampling of a single-channel W x H score grid
/// to an out_height x out_width image (grid axis w maps to image column x).
ScalarImage upsample_scores(const VectorGrid& scores, std::size_t out_height,
                            std::size_t out_width);

/// Truncation radius of the Gaussian filter: ceil(4 * sigma).
std::size_t gaussian_radius(double sigma);

/// Separable Gaussian filter, truncated at gaussian_radius(sigma). Near the
/// border the kernel is renormalized over its in-bounds taps, so constants
/// are preserved exactly and outputs stay within [min, max] of the input.
ScalarImage gaussian_smooth(const ScalarImage& image, double sigma);

}  // namespace patchcluster::scoring

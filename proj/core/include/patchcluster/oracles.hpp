#pragma once

// Brute-force reference implementations. They define the semantics the
// fast paths in the library are checked against, and share no code with
// them: quadratic loops, full sorts, dense threshold sweeps.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "patchcluster/grid.hpp"

namespace patchcluster::oracle {

struct Neighbors {
  std::vector<double> distances;
  std::vector<std::size_t> indices;
};

/// Row `i` of a row-major points matrix with `dim` columns.
std::span<const float> row(std::span<const float> points, std::size_t dim,
                           std::size_t i);

double euclidean(std::span<const float> a, std::span<const float> b);

/// Sort every row by (distance, index); return entries
/// [start_index - 1, start_index - 1 + k).
Neighbors knn_oracle(std::span<const float> points, std::size_t dim,
                     std::span<const float> query, std::size_t k,
                     std::size_t start_index = 1);

/// k-center greedy recomputing every min-distance from scratch each step.
std::vector<std::size_t> greedy_oracle(std::span<const float> points,
                                       std::size_t dim, std::size_t m,
                                       std::uint64_t seed);

/// Fraction of (positive, negative) pairs ranked correctly, ties = 1/2.
double auroc_oracle(std::span<const float> scores,
                    std::span<const std::uint8_t> labels);

/// Component count of a mask under 8-connectivity, via union-find.
std::size_t component_count_oracle(const Mask& mask);

/// Per-pixel component label (0 = background, components numbered from 1
/// in row-major order of their first pixel), via union-find.
std::vector<std::size_t> component_labels_oracle(const Mask& mask);

/// PRO with explicit thresholds: each threshold evaluated by a dense pixel
/// loop; the (FPR, PRO) points plus the (0, 0) anchor are integrated with
/// the trapezoid rule up to fpr_limit and normalized.
double pro_oracle(std::span<const ScalarImage> maps, std::span<const Mask> masks,
                  std::span<const double> thresholds, double fpr_limit);

/// pro_oracle with every distinct pooled score as a threshold.
double pro_oracle_dense(std::span<const ScalarImage> maps,
                        std::span<const Mask> masks, double fpr_limit);

/// Mean distance of the query to its K neighbours (from start_index),
/// recomputed from the raw vectors.
double patch_score_oracle(std::span<const float> points, std::size_t dim,
                          std::span<const float> query, std::size_t k,
                          std::size_t start_index);

/// (1 - exp(a) / sum exp(d)) * a evaluated literally.
double image_score_oracle(double max_patch_score, std::span<const double> distances);

/// Textbook LoF. Bank rows' own neighbourhoods exclude themselves; the
/// query's neighbourhood starts at start_index. Returns 1 when every
/// reachability distance of the query is zero.
double lof_oracle(std::span<const float> points, std::size_t dim,
                  std::span<const float> query, std::size_t k,
                  std::size_t start_index);

}  // namespace patchcluster::oracle

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "patchcluster/grid.hpp"

namespace patchcluster::eval {

/// Area under the ROC curve: the Mann-Whitney U statistic over
/// (#pos * #neg), ties counted as one half. Labels are 0 (normal) or
/// nonzero (anomalous). Throws undefined_metric unless both classes occur.
double auroc(std::span<const float> scores, std::span<const std::uint8_t> labels);

/// AUROC over the pooled pixels of all images.
double pixel_auroc(std::span<const ScalarImage> maps, std::span<const Mask> masks);

/// One 8-connected component of a mask, as flat pixel indices (y * W + x)
/// in discovery order.
struct Region {
  std::size_t id = 0;
  std::vector<std::size_t> pixels;
};

/// 8-connected components of the nonzero pixels, ids assigned in row-major
/// discovery order of each component's first pixel.
std::vector<Region> connected_components(const Mask& mask);

inline constexpr double kDefaultFprLimit = 0.3;
inline constexpr std::size_t kDefaultProThresholds = 200;

struct ProPoint {
  double threshold;
  double fpr;  // fraction of normal pixels with score >= threshold
  double pro;  // mean over regions of |region & (score >= threshold)| / |region|
};

/// `count` thresholds at evenly spaced quantile levels j / (count - 1) of
/// the pooled scores (nearest-rank), in descending order, duplicates
/// removed.
std::vector<double> quantile_thresholds(std::span<const ScalarImage> maps,
                                        std::size_t count);

/// PRO / FPR operating points for the given thresholds, sorted by FPR.
std::vector<ProPoint> pro_curve(std::span<const ScalarImage> maps,
                                std::span<const Mask> masks,
                                std::span<const double> thresholds);

/// Normalized area under a PRO-vs-FPR curve up to fpr_limit. The curve is
/// anchored at (0, 0), integrated with the trapezoid rule, linearly
/// interpolated at fpr_limit and divided by fpr_limit.
double integrate_pro(std::span<const ProPoint> curve, double fpr_limit);

/// PRO score with quantile thresholds. Throws undefined_metric when the
/// masks contain no anomalous region or no normal pixel.
double pro_score(std::span<const ScalarImage> maps, std::span<const Mask> masks,
                 double fpr_limit = kDefaultFprLimit,
                 std::size_t thresholds = kDefaultProThresholds);

/// PRO score with caller-chosen thresholds.
double pro_score_at(std::span<const ScalarImage> maps, std::span<const Mask> masks,
                    std::span<const double> thresholds,
                    double fpr_limit = kDefaultFprLimit);

}  // namespace patchcluster::eval

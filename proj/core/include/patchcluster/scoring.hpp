#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchcluster/features.hpp"
#include "patchcluster/grid.hpp"
#include "patchcluster/knn.hpp"
#include "patchcluster/manifest.hpp"
#include "patchcluster/memory_bank.hpp"

namespace patchcluster::scoring {

enum class Scorer { patch_cluster, patch_core, lof };

std::string_view to_string(Scorer s) noexcept;
Scorer parse_scorer(std::string_view name);

struct ScorerConfig {
  std::size_t k = 100;
  std::size_t start_index = 2;
  Scorer scorer = Scorer::patch_cluster;
  std::size_t b = 0;  // neighbourhood of f* in the image score; 0 means K
  double gaussian_sigma = 4.0;
  bool clamp_weight = false;
  std::size_t workers = 1;

  std::size_t effective_b() const noexcept { return b == 0 ? k : b; }
  /// Throws invalid_argument / insufficient_bank_size.
  void validate(std::size_t bank_size) const;
};

/// K paired with each coreset ratio: 100% -> 100, 25% -> 25, 10% -> 10,
/// 1% -> 5. Other ratios get max(5, round(100 * ratio)).
std::size_t default_k_for_ratio(double ratio);

struct RawScoreMap {
  std::string image_id;
  VectorGrid scores;  // W x H x 1, feature-grid resolution
  std::size_t argmax_w = 0;
  std::size_t argmax_h = 0;
  double max_score = 0.0;
  std::vector<float> argmax_feature;
  bank::NeighborSet argmax_neighbors;
};

struct ScoreMap {
  std::string image_id;
  ScalarImage pixels;  // H_img x W_img
  double image_score = 0.0;
  double max_patch_score = 0.0;
};

/// Mean of the neighbour distances.
double patch_score(const bank::NeighborSet& neighbors);

/// Local-outlier-factor state for one bank and neighbourhood size: every
/// row's k-distance and mean reachability distance over its own K
/// neighbours (the row itself excluded).
class LofModel {
 public:
  LofModel(const bank::MemoryBank& bank, std::size_t k, std::size_t workers = 1);

  std::size_t k() const noexcept { return k_; }

  /// LoF of a query given its K bank neighbours. Returns 1 when the
  /// query's reachability distances are all zero.
  double score(std::span<const float> query,
               const bank::NeighborSet& neighbors) const;

 private:
  const bank::MemoryBank* bank_;
  std::size_t k_;
  std::vector<double> k_distance_;
  std::vector<double> mean_reach_;
};

/// LoF of one query against the bank (builds a LofModel internally).
double lof_score(const bank::MemoryBank& bank, std::span<const float> query,
                 std::size_t k, std::size_t start_index);

/// Scores every location of the map. PatchCluster: mean distance to the K
/// neighbours from start_index; PatchCore: distance to the single
/// neighbour at start_index; LoF: local outlier factor over K neighbours.
/// `lof` is reused when given (scorer == lof), otherwise built on demand.
RawScoreMap score_feature_map(const bank::MemoryBank& bank,
                              const features::PatchFeatureMap& map,
                              const ScorerConfig& cfg,
                              const LofModel* lof = nullptr);

/// (1 - exp(a*) / sum_j exp(d_j)) * a*, evaluated with a log-sum-exp
/// shift; with clamp the weight is clamped to [0, 1].
double reweighted_score(double max_patch_score, std::span<const double> distances,
                        bool clamp);

/// Image-level score. For PatchCluster and PatchCore: reweighted_score of
/// the maximum patch score, where the distances run from the argmax patch
/// to the b nearest bank rows (start_index 1) of its nearest bank feature.
/// For LoF the maximum patch score is returned unchanged.
double image_score(const RawScoreMap& raw, const bank::MemoryBank& bank,
                   const ScorerConfig& cfg);

/// Bilinear upsampling to image resolution followed by Gaussian smoothing.
/// image_score is initialised to the maximum patch score.
ScoreMap upsample_and_smooth(const RawScoreMap& raw, io::ImageSize size,
                             double sigma);

}  // namespace patchcluster::scoring

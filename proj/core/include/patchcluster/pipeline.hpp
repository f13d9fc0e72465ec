#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "patchcluster/features.hpp"
#include "patchcluster/manifest.hpp"
#include "patchcluster/memory_bank.hpp"
#include "patchcluster/scoring.hpp"

namespace patchcluster::pipeline {

/// Feature maps for each record, in record order.
std::vector<features::PatchFeatureMap> load_features(
    std::span<const io::ImageRecord> records,
    std::size_t patch_size = features::kDefaultPoolSize, std::size_t workers = 1);

struct BankOptions {
  double ratio = 1.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> projection_dim;
  std::size_t workers = 1;
};

/// assemble, then coreset_subsample when ratio < 1.
bank::MemoryBank build_bank(std::span<const features::PatchFeatureMap> maps,
                            const BankOptions& options);

/// Full per-image scoring: raw map, image score, upsampling and smoothing.
std::vector<scoring::ScoreMap> score_images(
    const bank::MemoryBank& bank, std::span<const features::PatchFeatureMap> maps,
    const scoring::ScorerConfig& cfg, io::ImageSize image_size);

}  // namespace patchcluster::pipeline

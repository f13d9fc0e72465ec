#include "patchcluster/pipeline.hpp"

#include <memory>

#include "patchcluster/coreset.hpp"
#include "patchcluster/parallel.hpp"

namespace patchcluster::pipeline {

std::vector<features::PatchFeatureMap> load_features(
    std::span<const io::ImageRecord> records, std::size_t patch_size,
    std::size_t workers) {
  std::vector<features::PatchFeatureMap> maps(records.size());
  parallel_for(records.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      maps[i] = features::load_patch_features(records[i].feature_paths, records[i].id,
                                              patch_size);
    }
  });
  return maps;
}

bank::MemoryBank build_bank(std::span<const features::PatchFeatureMap> maps,
                            const BankOptions& options) {
  bank::MemoryBank full = bank::assemble(maps);
  if (options.ratio >= 1.0) return full;
  return bank::coreset_subsample(full, options.ratio, options.seed,
                                 options.projection_dim, options.workers);
}

std::vector<scoring::ScoreMap> score_images(
    const bank::MemoryBank& bank, std::span<const features::PatchFeatureMap> maps,
    const scoring::ScorerConfig& cfg, io::ImageSize image_size) {
  cfg.validate(bank.size());
  std::unique_ptr<scoring::LofModel> lof;
  if (cfg.scorer == scoring::Scorer::lof) {
    lof = std::make_unique<scoring::LofModel>(bank, cfg.k, cfg.workers);
  }
  std::vector<scoring::ScoreMap> out;
  out.reserve(maps.size());
  for (const auto& map : maps) {
    const auto raw = scoring::score_feature_map(bank, map, cfg, lof.get());
    auto scored = scoring::upsample_and_smooth(raw, image_size, cfg.gaussian_sigma);
    scored.image_score = scoring::image_score(raw, bank, cfg);
    out.push_back(std::move(scored));
  }
  return out;
}

}  // namespace patchcluster::pipeline

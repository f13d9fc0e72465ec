#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "patchcluster/manifest.hpp"
#include "patchcluster/report.hpp"
#include "patchcluster/scoring.hpp"
#include "patchcluster/synthetic.hpp"

namespace patchcluster::cli {

namespace fs = std::filesystem;

/// Settings shared by bank, score, eval and run.
///
/// `one_class` builds the bank from the train split and scores the test
/// split; it is only compatible with the test setting. When `k` is unset it
/// follows the coreset ratio (default_k_for_ratio). When `start_index` is
/// unset it is 2 for mix/test/ano and 1 for one-class runs, where queries
/// are never part of the bank.
struct RunConfig {
  fs::path manifest;
  io::BadSetting setting = io::BadSetting::test;
  bool one_class = false;
  scoring::Scorer scorer = scoring::Scorer::patch_cluster;
  std::optional<std::size_t> k;
  std::optional<std::size_t> start_index;
  std::size_t b = 0;
  double ratio = 1.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> projection_dim;
  double sigma = 4.0;
  std::size_t patch_size = 3;
  bool clamp_weight = false;
  fs::path out;
  std::size_t workers = 1;

  /// Throws config_conflict / invalid_argument.
  void validate() const;
  scoring::ScorerConfig scorer_config() const;
  /// Records whose features go into the bank.
  std::vector<io::ImageRecord> bank_records(const io::DatasetManifest& m) const;
  /// Records that get scored and evaluated.
  std::vector<io::ImageRecord> scored_records(const io::DatasetManifest& m) const;
  std::string setting_name() const;
  /// Echoed into score and eval outputs; holds no paths.
  nlohmann::json to_json() const;
};

/// Parses "mix", "test", "ano" or "one-class" into cfg.
void apply_setting(RunConfig& cfg, const std::string& name);

/// Artifact locations under an output directory.
struct Layout {
  fs::path root;

  fs::path bank() const { return root / "bank.pcfb"; }
  fs::path score_maps() const { return root / "score_maps"; }
  fs::path scores() const { return root / "scores.json"; }
  fs::path report() const { return root / "report.json"; }
  fs::path heatmaps() const { return root / "heatmaps"; }
};

/// Replaces characters outside [A-Za-z0-9._-] with '_'.
std::string file_stem_for(const std::string& id);

struct ImportOptions {
  fs::path root;
  fs::path out;
  std::uint32_t resize = 256;
  std::uint32_t crop = 224;
};

/// Maps an MVTec-style tree (one category, or a root of categories) to one
/// manifest per category at <out>/<category>/manifest.json. Ground-truth
/// PNGs are resized, centre-cropped and written as mask tensors. Feature
/// paths are left empty for the extractor to fill. Returns the manifest
/// paths.
std::vector<fs::path> cmd_import_mvtec(const ImportOptions& options);

/// Builds the bank and writes bank.pcfb + bank.json.
fs::path cmd_bank(const RunConfig& cfg);

/// Scores with the bank under cfg.out (or `bank_path` when given) and
/// writes score_maps/<id>.pcfb plus scores.json.
fs::path cmd_score(const RunConfig& cfg, const std::optional<fs::path>& bank_path = {});

/// Evaluates the scores under cfg.out and writes report.json.
eval::EvalReport cmd_eval(const RunConfig& cfg);

/// Writes a synthetic dataset to `out`.
io::DatasetManifest cmd_synth(const synth::SynthConfig& cfg, const fs::path& out);

/// Renders heatmaps/<id>.png for every scored image, blended over the
/// record's image when it has one.
std::size_t cmd_heatmap(const RunConfig& cfg);

/// bank, score and eval in sequence.
eval::EvalReport cmd_run(const RunConfig& cfg);

}  // namespace patchcluster::cli

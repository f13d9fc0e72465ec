#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <vector>

#include "patchcluster/grid.hpp"
#include "patchcluster/manifest.hpp"

namespace patchcluster::synth {

/// Contaminated feature dataset generator.
///
/// Normal locations: the grid is tiled into square blocks, each block is
/// bound to one of `num_location_clusters` contextual clusters, and every
/// image shifts the tiling by a random integer offset in
/// [-max_shift, max_shift]. A normal vector is its cluster centre plus
/// isotropic noise of normal_sigma.
///
/// Anomalous images carry one axis-aligned rectangular blob covering
/// anomaly_area_fraction of the grid. The blob gets a defect centre drawn
/// around the local cluster centre with spread anomaly_sigma; blob vectors
/// scatter around that centre with defect_sigma. Masks mark the blob at
/// image resolution (grid x pixel_scale).
struct SynthConfig {
  std::size_t num_images = 100;
  std::size_t num_train_images = 0;  // extra anomaly-free images with split=train
  std::size_t grid_width = 28;
  std::size_t grid_height = 28;
  std::size_t dim = 64;
  std::size_t num_location_clusters = 16;
  std::size_t cluster_block = 7;
  std::size_t max_shift = 2;
  double normal_sigma = 0.25;
  double anomaly_sigma = 1.0;
  double defect_sigma = 0.25;
  double anomaly_image_fraction = 0.23;
  double anomaly_area_fraction = 0.03;
  std::size_t pixel_scale = 8;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t anomalous_images() const;
  std::size_t blob_cells() const;
};

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& doc);

struct SynthImage {
  std::string id;
  io::Split split = io::Split::test;
  VectorGrid features;  // W x H x D
  Mask mask;            // (H * scale) x (W * scale)
  bool anomalous = false;
};

struct SynthDataset {
  SynthConfig config;
  io::ImageSize image_size;
  std::vector<SynthImage> images;
};

/// Deterministic for a given config (including seed).
SynthDataset generate(const SynthConfig& cfg);

/// Writes features/<id>.pcfb, masks/<id>.pcfb (anomalous images only),
/// manifest.json and synth.json under `out_dir`, and returns the manifest.
io::DatasetManifest write_dataset(const SynthDataset& data,
                                  const std::filesystem::path& out_dir,
                                  const std::string& category = "synthetic");

/// generate + write_dataset.
io::DatasetManifest generate_bad_dataset(const SynthConfig& cfg,
                                         const std::filesystem::path& out_dir);

}  // namespace patchcluster::synth

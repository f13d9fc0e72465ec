#include "patchcluster/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "patchcluster/error.hpp"
#include "patchcluster/features.hpp"
#include "patchcluster/tensor_file.hpp"

namespace patchcluster::synth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ptrdiff_t floor_div(std::ptrdiff_t a, std::ptrdiff_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

std::size_t positive_mod(std::ptrdiff_t a, std::size_t m) {
  const auto r = a % static_cast<std::ptrdiff_t>(m);
  return static_cast<std::size_t>(r < 0 ? r + static_cast<std::ptrdiff_t>(m) : r);
}

std::string make_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04zu", prefix, i);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(Errc::invalid_argument, std::string("synth config: ") + what);
  };
  require(num_images >= 1, "num_images must be positive");
  require(grid_width >= 1 && grid_height >= 1, "grid must be non-empty");
  require(dim >= 1, "dim must be positive");
  require(num_location_clusters >= 1, "need at least one location cluster");
  require(cluster_block >= 1, "cluster_block must be positive");
  require(pixel_scale >= 1, "pixel_scale must be positive");
  require(normal_sigma > 0.0 && defect_sigma > 0.0, "sigmas must be positive");
  require(anomaly_sigma > normal_sigma, "anomaly_sigma must exceed normal_sigma");
  require(anomaly_image_fraction > 0.0 && anomaly_image_fraction < 1.0,
          "anomaly_image_fraction must lie in (0, 1)");
  require(anomaly_area_fraction > 0.0 && anomaly_area_fraction < 1.0,
          "anomaly_area_fraction must lie in (0, 1)");
}

std::size_t SynthConfig::anomalous_images() const {
  const auto n = static_cast<std::size_t>(
      std::llround(anomaly_image_fraction * static_cast<double>(num_images)));
  return std::clamp<std::size_t>(n, 1, num_images);
}

std::size_t SynthConfig::blob_cells() const {
  const auto cells = static_cast<std::size_t>(std::llround(
      anomaly_area_fraction * static_cast<double>(grid_width * grid_height)));
  return std::max<std::size_t>(1, cells);
}

json to_json(const SynthConfig& c) {
  return {{"num_images", c.num_images},
          {"num_train_images", c.num_train_images},
          {"grid_width", c.grid_width},
          {"grid_height", c.grid_height},
          {"dim", c.dim},
          {"num_location_clusters", c.num_location_clusters},
          {"cluster_block", c.cluster_block},
          {"max_shift", c.max_shift},
          {"normal_sigma", c.normal_sigma},
          {"anomaly_sigma", c.anomaly_sigma},
          {"defect_sigma", c.defect_sigma},
          {"anomaly_image_fraction", c.anomaly_image_fraction},
          {"anomaly_area_fraction", c.anomaly_area_fraction},
          {"pixel_scale", c.pixel_scale},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const json& doc) {
  SynthConfig c;
  try {
    c.num_images = doc.value("num_images", c.num_images);
    c.num_train_images = doc.value("num_train_images", c.num_train_images);
    c.grid_width = doc.value("grid_width", c.grid_width);
    c.grid_height = doc.value("grid_height", c.grid_height);
    c.dim = doc.value("dim", c.dim);
    c.num_location_clusters = doc.value("num_location_clusters", c.num_location_clusters);
    c.cluster_block = doc.value("cluster_block", c.cluster_block);
    c.max_shift = doc.value("max_shift", c.max_shift);
    c.normal_sigma = doc.value("normal_sigma", c.normal_sigma);
    c.anomaly_sigma = doc.value("anomaly_sigma", c.anomaly_sigma);
    c.defect_sigma = doc.value("defect_sigma", c.defect_sigma);
    c.anomaly_image_fraction = doc.value("anomaly_image_fraction", c.anomaly_image_fraction);
    c.anomaly_area_fraction = doc.value("anomaly_area_fraction", c.anomaly_area_fraction);
    c.pixel_scale = doc.value("pixel_scale", c.pixel_scale);
    c.seed = doc.value("seed", c.seed);
  } catch (const json::exception& e) {
    fail(Errc::parse_error, std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  const std::size_t W = cfg.grid_width, H = cfg.grid_height, D = cfg.dim;
  std::vector<double> centres(cfg.num_location_clusters * D);
  for (double& v : centres) v = unit(rng);

  const std::size_t blocks_x = (W + cfg.cluster_block - 1) / cfg.cluster_block;
  const std::size_t blocks_y = (H + cfg.cluster_block - 1) / cfg.cluster_block;
  auto cluster_of = [&](std::ptrdiff_t w, std::ptrdiff_t h) {
    const auto block = static_cast<std::ptrdiff_t>(cfg.cluster_block);
    const std::size_t bx = positive_mod(floor_div(w, block), blocks_x);
    const std::size_t by = positive_mod(floor_div(h, block), blocks_y);
    return (bx + blocks_x * by) % cfg.num_location_clusters;
  };

  // Which test images carry a defect.
  std::vector<std::size_t> order(cfg.num_images);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_anomalous(cfg.num_images, false);
  for (std::size_t i = 0; i < cfg.anomalous_images(); ++i) is_anomalous[order[i]] = true;

  SynthDataset data;
  data.config = cfg;
  data.image_size = {static_cast<std::uint32_t>(H * cfg.pixel_scale),
                     static_cast<std::uint32_t>(W * cfg.pixel_scale)};

  const std::size_t total = cfg.num_images + cfg.num_train_images;
  const auto shift_range = static_cast<std::ptrdiff_t>(cfg.max_shift);
  std::uniform_int_distribution<std::ptrdiff_t> shift(-shift_range, shift_range);
  std::uniform_real_distribution<double> log_aspect(std::log(0.5), std::log(2.0));

  for (std::size_t n = 0; n < total; ++n) {
    const bool train = n >= cfg.num_images;
    SynthImage img;
    img.id = train ? make_id("train", n - cfg.num_images) : make_id("test", n);
    img.split = train ? io::Split::train : io::Split::test;
    img.anomalous = !train && is_anomalous[n];
    img.features = VectorGrid(W, H, D);
    img.mask = Mask(data.image_size.height, data.image_size.width, 0);

    const std::ptrdiff_t dx = shift(rng), dy = shift(rng);
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t h = 0; h < H; ++h) {
        const std::size_t c = cluster_of(std::ptrdiff_t(w) + dx, std::ptrdiff_t(h) + dy);
        auto v = img.features.at(w, h);
        for (std::size_t k = 0; k < D; ++k) {
          v[k] = static_cast<float>(centres[c * D + k] + cfg.normal_sigma * unit(rng));
        }
      }
    }

    if (img.anomalous) {
      const double area = static_cast<double>(cfg.blob_cells());
      const double aspect = std::exp(log_aspect(rng));
      const auto bw = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::llround(std::sqrt(area * aspect))), 1, W);
      const auto bh = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::llround(area / double(bw))), 1, H);
      std::uniform_int_distribution<std::size_t> px(0, W - bw), py(0, H - bh);
      const std::size_t x0 = px(rng), y0 = py(rng);

      const std::size_t c = cluster_of(std::ptrdiff_t(x0 + bw / 2) + dx,
                                       std::ptrdiff_t(y0 + bh / 2) + dy);
      std::vector<double> defect(D);
      for (std::size_t k = 0; k < D; ++k) {
        defect[k] = centres[c * D + k] + cfg.anomaly_sigma * unit(rng);
      }
      for (std::size_t w = x0; w < x0 + bw; ++w) {
        for (std::size_t h = y0; h < y0 + bh; ++h) {
          auto v = img.features.at(w, h);
          for (std::size_t k = 0; k < D; ++k) {
            v[k] = static_cast<float>(defect[k] + cfg.defect_sigma * unit(rng));
          }
        }
      }
      const std::size_t s = cfg.pixel_scale;
      for (std::size_t y = y0 * s; y < (y0 + bh) * s; ++y) {
        for (std::size_t x = x0 * s; x < (x0 + bw) * s; ++x) img.mask.at(y, x) = 1;
      }
    }
    data.images.push_back(std::move(img));
  }
  return data;
}

io::DatasetManifest write_dataset(const SynthDataset& data, const fs::path& out_dir,
                                  const std::string& category) {
  fs::create_directories(out_dir / "features");
  fs::create_directories(out_dir / "masks");
  io::DatasetManifest manifest;
  manifest.category = category;
  manifest.image_size = data.image_size;
  for (const auto& img : data.images) {
    io::ImageRecord rec;
    rec.id = img.id;
    rec.split = img.split;
    rec.label = img.anomalous ? io::Label::anomalous : io::Label::normal;
    const fs::path feature_path = out_dir / "features" / (img.id + ".pcfb");
    features::save_grid(feature_path, img.features);
    rec.feature_paths.push_back(fs::absolute(feature_path));
    if (img.anomalous) {
      const fs::path mask_path = out_dir / "masks" / (img.id + ".pcfb");
      const std::size_t dims[2] = {img.mask.height, img.mask.width};
      io::write_tensor(mask_path, dims, std::span<const std::uint8_t>(img.mask.data));
      rec.mask_path = fs::absolute(mask_path);
    }
    manifest.records.push_back(std::move(rec));
  }
  io::save_manifest(manifest, out_dir / "manifest.json");

  std::ofstream out(out_dir / "synth.json", std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot write synth.json");
  out << to_json(data.config).dump(2) << '\n';
  return manifest;
}

io::DatasetManifest generate_bad_dataset(const SynthConfig& cfg, const fs::path& out_dir) {
  return write_dataset(generate(cfg), out_dir);
}

}  // namespace patchcluster::synth

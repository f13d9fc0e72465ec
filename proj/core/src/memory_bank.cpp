#include "patchcluster/memory_bank.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "patchcluster/error.hpp"
#include "patchcluster/tensor_file.hpp"

namespace patchcluster::bank {

namespace fs = std::filesystem;
using nlohmann::json;

MemoryBank::MemoryBank(std::size_t dim, std::vector<float> features,
                       std::vector<Provenance> provenance,
                       std::vector<std::string> image_ids,
                       BankMetadata metadata)
    : dim_(dim),
      features_(std::move(features)),
      provenance_(std::move(provenance)),
      image_ids_(std::move(image_ids)),
      metadata_(metadata) {
  if (dim_ == 0 || provenance_.empty()) {
    fail(Errc::invalid_argument, "memory bank must hold at least one row");
  }
  if (features_.size() != provenance_.size() * dim_) {
    fail(Errc::shape_mismatch, "memory bank features and provenance disagree");
  }
  for (const auto& p : provenance_) {
    if (p.image >= image_ids_.size()) {
      fail(Errc::invalid_argument, "provenance refers to unknown image");
    }
  }
  norms_.resize(provenance_.size());
  for (std::size_t i = 0; i < provenance_.size(); ++i) {
    double s = 0.0;
    for (float v : row(i)) {
      if (!std::isfinite(v)) {
        fail(Errc::invalid_argument, "non-finite value in memory bank row " +
                                         std::to_string(i));
      }
      s += static_cast<double>(v) * v;
    }
    norms_[i] = s;
  }
}

MemoryBank MemoryBank::select(std::span<const std::size_t> rows,
                              BankMetadata metadata) const {
  std::vector<float> f;
  f.reserve(rows.size() * dim_);
  std::vector<Provenance> p;
  p.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto v = row(r);
    f.insert(f.end(), v.begin(), v.end());
    p.push_back(provenance_[r]);
  }
  return MemoryBank(dim_, std::move(f), std::move(p), image_ids_, metadata);
}

MemoryBank assemble(std::span<const features::PatchFeatureMap> maps) {
  if (maps.empty()) fail(Errc::invalid_argument, "assemble: no feature maps");
  const std::size_t dim = maps.front().dim();
  std::size_t rows = 0;
  for (const auto& m : maps) {
    if (m.dim() != dim) {
      fail(Errc::shape_mismatch, "assemble: map '" + m.image_id + "' has dim " +
                                     std::to_string(m.dim()) + ", expected " +
                                     std::to_string(dim));
    }
    rows += m.grid.locations();
  }

  std::vector<float> features;
  features.reserve(rows * dim);
  std::vector<Provenance> prov;
  prov.reserve(rows);
  std::vector<std::string> ids;
  ids.reserve(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i];
    ids.push_back(m.image_id);
    for (std::size_t h = 0; h < m.height(); ++h) {
      for (std::size_t w = 0; w < m.width(); ++w) {
        const auto v = m.grid.at(w, h);
        features.insert(features.end(), v.begin(), v.end());
        prov.push_back({static_cast<std::uint32_t>(i),
                        static_cast<std::uint32_t>(w),
                        static_cast<std::uint32_t>(h)});
      }
    }
  }
  return MemoryBank(dim, std::move(features), std::move(prov), std::move(ids));
}

fs::path sidecar_path(const fs::path& tensor_path) {
  fs::path p = tensor_path;
  p.replace_extension(".json");
  return p;
}

void save_bank(const MemoryBank& bank, const fs::path& tensor_path) {
  const std::size_t dims[2] = {bank.size(), bank.dim()};
  io::write_tensor(tensor_path, dims, bank.features());

  json doc;
  doc["schema_version"] = 1;
  doc["rows"] = bank.size();
  doc["dim"] = bank.dim();
  doc["subsample_ratio"] = bank.metadata().subsample_ratio;
  doc["seed"] = bank.metadata().seed;
  doc["projection_dim"] = bank.metadata().projection_dim
                              ? json(*bank.metadata().projection_dim)
                              : json(nullptr);
  doc["image_ids"] = std::vector<std::string>(bank.image_ids().begin(),
                                              bank.image_ids().end());
  json prov = json::array();
  for (const auto& p : bank.provenance()) prov.push_back({p.image, p.w, p.h});
  doc["provenance"] = std::move(prov);

  const fs::path side = sidecar_path(tensor_path);
  std::ofstream out(side, std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot write " + side.string());
  out << doc.dump() << '\n';
}

MemoryBank load_bank(const fs::path& tensor_path) {
  io::Tensor t = io::read_tensor(tensor_path);
  if (t.dims.size() != 2 || t.dtype() != io::DType::f32) {
    fail(Errc::shape_mismatch, "bank tensor must be 2-D float32: " +
                                   tensor_path.string());
  }
  const fs::path side = sidecar_path(tensor_path);
  std::ifstream in(side);
  if (!in) fail(Errc::missing_input, "missing bank sidecar " + side.string());
  try {
    const json doc = json::parse(in);
    BankMetadata meta;
    meta.subsample_ratio = doc.at("subsample_ratio").get<double>();
    meta.seed = doc.at("seed").get<std::uint64_t>();
    if (!doc.at("projection_dim").is_null()) {
      meta.projection_dim = doc["projection_dim"].get<std::size_t>();
    }
    auto ids = doc.at("image_ids").get<std::vector<std::string>>();
    std::vector<Provenance> prov;
    prov.reserve(t.dims[0]);
    for (const auto& p : doc.at("provenance")) {
      prov.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>(),
                      p.at(2).get<std::uint32_t>()});
    }
    if (prov.size() != t.dims[0]) {
      fail(Errc::shape_mismatch, "bank sidecar row count does not match tensor");
    }
    return MemoryBank(t.dims[1], std::get<std::vector<float>>(std::move(t.values)),
                      std::move(prov), std::move(ids), meta);
  } catch (const json::exception& e) {
    fail(Errc::parse_error, side.string() + ": " + e.what());
  }
}

}  // namespace patchcluster::bank

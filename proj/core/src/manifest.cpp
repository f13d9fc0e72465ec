#include "patchcluster/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "patchcluster/error.hpp"
#include "patchcluster/tensor_file.hpp"

namespace patchcluster::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string relativize(const fs::path& base, const fs::path& p) {
  if (!p.is_absolute() || base.empty()) return p.generic_string();
  const fs::path rel = p.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

void require_file(const fs::path& p, const std::string& id) {
  if (!fs::exists(p)) {
    fail(Errc::missing_input,
         "record '" + id + "' references missing file: " + p.string());
  }
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  fail(Errc::parse_error, "unknown split '" + s + "'");
}

Label parse_label(const std::string& s) {
  if (s == "normal") return Label::normal;
  if (s == "anomalous") return Label::anomalous;
  fail(Errc::parse_error, "unknown label '" + s + "'");
}

}  // namespace

std::string_view to_string(Split s) noexcept {
  return s == Split::train ? "train" : "test";
}

std::string_view to_string(Label l) noexcept {
  return l == Label::normal ? "normal" : "anomalous";
}

std::string_view to_string(BadSetting s) noexcept {
  switch (s) {
    case BadSetting::mix: return "mix";
    case BadSetting::test: return "test";
    case BadSetting::ano: return "ano";
  }
  return "mix";
}

BadSetting parse_setting(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "mix") return BadSetting::mix;
  if (lower == "test") return BadSetting::test;
  if (lower == "ano") return BadSetting::ano;
  fail(Errc::invalid_argument, "unknown setting '" + std::string(name) + "'");
}

Mask read_mask(const fs::path& path) {
  const Tensor t = read_tensor(path);
  if (t.dims.size() != 2) {
    fail(Errc::shape_mismatch, "mask must be 2-D: " + path.string());
  }
  const auto& raw = t.u8();
  Mask m(t.dims[0], t.dims[1]);
  for (std::size_t i = 0; i < raw.size(); ++i) m.data[i] = raw[i] != 0 ? 1 : 0;
  return m;
}

Mask record_mask(const ImageRecord& record, ImageSize size) {
  if (!record.mask_path) return Mask(size.height, size.width, 0);
  Mask m = read_mask(*record.mask_path);
  if (m.height != size.height || m.width != size.width) {
    fail(Errc::shape_mismatch,
         "mask of '" + record.id + "' is " + std::to_string(m.height) + "x" +
             std::to_string(m.width) + ", manifest image_size is " +
             std::to_string(size.height) + "x" + std::to_string(size.width));
  }
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_input, "cannot open manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }

  const fs::path base = fs::absolute(path).parent_path();
  DatasetManifest m;
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kManifestSchemaVersion) {
      fail(Errc::unsupported_version,
           "unsupported manifest schema_version " + std::to_string(version));
    }
    m.category = doc.at("category").get<std::string>();
    m.image_size.height = doc.at("image_size").at("height").get<std::uint32_t>();
    m.image_size.width = doc.at("image_size").at("width").get<std::uint32_t>();
    for (const auto& r : doc.at("records")) {
      ImageRecord rec;
      rec.id = r.at("id").get<std::string>();
      for (const auto& fp : r.at("feature_paths")) {
        rec.feature_paths.push_back(resolve(base, fp.get<std::string>()));
      }
      if (r.contains("mask_path") && !r["mask_path"].is_null()) {
        rec.mask_path = resolve(base, r["mask_path"].get<std::string>());
      }
      if (r.contains("image_path") && !r["image_path"].is_null()) {
        rec.image_path = resolve(base, r["image_path"].get<std::string>());
      }
      rec.split = parse_split(r.at("split").get<std::string>());
      rec.label = parse_label(r.at("label").get<std::string>());
      m.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }

  std::set<std::string> ids;
  for (auto& rec : m.records) {
    if (!ids.insert(rec.id).second) {
      fail(Errc::parse_error, "duplicate record id '" + rec.id + "'");
    }
    for (const auto& fp : rec.feature_paths) require_file(fp, rec.id);
    if (rec.image_path) require_file(*rec.image_path, rec.id);
    if (rec.mask_path) {
      require_file(*rec.mask_path, rec.id);
      const Mask mask = record_mask(rec, m.image_size);
      const bool any = std::any_of(mask.data.begin(), mask.data.end(),
                                   [](unsigned char v) { return v != 0; });
      rec.label = any ? Label::anomalous : Label::normal;
    } else if (rec.label == Label::anomalous) {
      fail(Errc::parse_error,
           "record '" + rec.id + "' is labeled anomalous but has no mask");
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  json doc;
  doc["schema_version"] = kManifestSchemaVersion;
  doc["category"] = manifest.category;
  doc["image_size"] = {{"height", manifest.image_size.height},
                       {"width", manifest.image_size.width}};
  json records = json::array();
  for (const auto& rec : manifest.records) {
    json r;
    r["id"] = rec.id;
    json fps = json::array();
    for (const auto& fp : rec.feature_paths) {
      fps.push_back(relativize(base, fs::absolute(fp)));
    }
    r["feature_paths"] = fps;
    r["mask_path"] = rec.mask_path
                         ? json(relativize(base, fs::absolute(*rec.mask_path)))
                         : json(nullptr);
    r["image_path"] = rec.image_path
                          ? json(relativize(base, fs::absolute(*rec.image_path)))
                          : json(nullptr);
    r["split"] = std::string(to_string(rec.split));
    r["label"] = std::string(to_string(rec.label));
    records.push_back(std::move(r));
  }
  doc["records"] = std::move(records);

  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot write manifest: " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<ImageRecord> build_bad_setting(const DatasetManifest& manifest,
                                           BadSetting setting) {
  std::vector<ImageRecord> out;
  for (const auto& rec : manifest.records) {
    const bool keep =
        setting == BadSetting::mix ||
        (setting == BadSetting::test && rec.split == Split::test) ||
        (setting == BadSetting::ano && rec.split == Split::test &&
         rec.label == Label::anomalous);
    if (keep) out.push_back(rec);
  }
  if (out.empty()) {
    fail(Errc::empty_setting, "setting '" + std::string(to_string(setting)) +
                                  "' selects no records in category '" +
                                  manifest.category + "'");
  }
  std::sort(out.begin(), out.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
  return out;
}

}  // namespace patchcluster::io

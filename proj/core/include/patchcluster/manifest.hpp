#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patchcluster/grid.hpp"

namespace patchcluster::io {

inline constexpr int kManifestSchemaVersion = 1;

enum class Split { train, test };
enum class Label { normal, anomalous };

struct ImageSize {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct ImageRecord {
  std::string id;
  std::vector<std::filesystem::path> feature_paths;  // one per backbone stage
  std::optional<std::filesystem::path> mask_path;
  std::optional<std::filesystem::path> image_path;
  Split split = Split::test;
  Label label = Label::normal;
};

struct DatasetManifest {
  std::string category;
  ImageSize image_size;
  std::vector<ImageRecord> records;
};

enum class BadSetting { mix, test, ano };

std::string_view to_string(Split s) noexcept;
std::string_view to_string(Label l) noexcept;
std::string_view to_string(BadSetting s) noexcept;
BadSetting parse_setting(std::string_view name);

/// Loads and validates a manifest. Relative paths resolve against the
/// manifest's directory. Ids must be unique and every referenced file must
/// exist. When a record has a mask, its label is re-derived from the mask
/// (anomalous iff any pixel is nonzero) and the mask shape is checked
/// against image_size.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes the manifest as JSON. Paths under the manifest directory are
/// stored relative to it.
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

/// Reads a 2-D uint8 mask tensor. Any nonzero value marks an anomalous
/// pixel; the returned mask is normalized to {0, 1}.
Mask read_mask(const std::filesystem::path& path);

/// Mask for a record: the stored mask, or all-zero when none is given.
Mask record_mask(const ImageRecord& record, ImageSize size);

/// Mix: every record. Test: split == test. Ano: split == test and
/// label == anomalous. Result sorted by id.
std::vector<ImageRecord> build_bad_setting(const DatasetManifest& manifest,
                                           BadSetting setting);

}  // namespace patchcluster::io

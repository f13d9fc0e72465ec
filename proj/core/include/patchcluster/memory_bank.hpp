#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchcluster/features.hpp"

namespace patchcluster::bank {

/// Where a bank row came from. `image` indexes MemoryBank::image_ids().
struct Provenance {
  std::uint32_t image = 0;
  std::uint32_t w = 0;
  std::uint32_t h = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct BankMetadata {
  double subsample_ratio = 1.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> projection_dim;
};

/// Immutable N x D patch-feature memory bank with per-row provenance.
class MemoryBank {
 public:
  MemoryBank(std::size_t dim, std::vector<float> features,
             std::vector<Provenance> provenance,
             std::vector<std::string> image_ids, BankMetadata metadata = {});

  std::size_t size() const noexcept { return provenance_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {features_.data() + i * dim_, dim_};
  }
  std::span<const float> features() const noexcept { return features_; }
  /// Squared L2 norm of every row, accumulated in double.
  std::span<const double> squared_norms() const noexcept { return norms_; }

  const Provenance& provenance(std::size_t i) const noexcept {
    return provenance_[i];
  }
  std::span<const Provenance> provenance() const noexcept { return provenance_; }
  const std::string& image_id_of(std::size_t i) const noexcept {
    return image_ids_[provenance_[i].image];
  }
  std::span<const std::string> image_ids() const noexcept { return image_ids_; }
  const BankMetadata& metadata() const noexcept { return metadata_; }

  /// New bank holding the given rows (in the given order) with their
  /// provenance.
  MemoryBank select(std::span<const std::size_t> rows, BankMetadata metadata) const;

 private:
  std::size_t dim_;
  std::vector<float> features_;
  std::vector<double> norms_;
  std::vector<Provenance> provenance_;
  std::vector<std::string> image_ids_;
  BankMetadata metadata_;
};

/// Stacks every location of every map. Maps keep input order; within a map
/// rows run over w fastest, then h.
MemoryBank assemble(std::span<const features::PatchFeatureMap> maps);

/// Writes `tensor_path` (N x D float tensor) and a JSON sidecar next to it
/// (same stem, .json) holding provenance and metadata.
void save_bank(const MemoryBank& bank, const std::filesystem::path& tensor_path);
MemoryBank load_bank(const std::filesystem::path& tensor_path);

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path);

}  // namespace patchcluster::bank

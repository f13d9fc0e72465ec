#pragma once

// PCFB tensor container.
//
// Layout (all integers little-endian):
//   magic       4 bytes   "PCFB"
//   version     u16       1
//   dtype_code  u8        0 = float32 (IEEE 754, little-endian), 1 = uint8
//   ndim        u8        2 or 3
//   dims        ndim x u32
//   payload     product(dims) values, row-major
//
// Masks are 2-D (H x W, uint8). Feature maps are 3-D (W x H x C, float32).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace patchcluster::io {

inline constexpr char kTensorMagic[4] = {'P', 'C', 'F', 'B'};
inline constexpr std::uint16_t kTensorVersion = 1;

enum class DType : std::uint8_t { f32 = 0, u8 = 1 };

std::size_t dtype_size(DType dtype) noexcept;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::variant<std::vector<float>, std::vector<std::uint8_t>> values;

  DType dtype() const noexcept {
    return values.index() == 0 ? DType::f32 : DType::u8;
  }
  std::size_t element_count() const noexcept;

  // Throw invalid_argument when the tensor holds the other dtype.
  const std::vector<float>& f32() const;
  const std::vector<std::uint8_t>& u8() const;
};

void write_tensor(const std::filesystem::path& path,
                  std::span<const std::size_t> dims,
                  std::span<const float> values);
void write_tensor(const std::filesystem::path& path,
                  std::span<const std::size_t> dims,
                  std::span<const std::uint8_t> values);

Tensor read_tensor(const std::filesystem::path& path);

/// Encode/decode without touching the filesystem. write_tensor/read_tensor
/// are thin wrappers around these.
std::vector<std::byte> encode_tensor(std::span<const std::size_t> dims,
                                     std::span<const float> values);
std::vector<std::byte> encode_tensor(std::span<const std::size_t> dims,
                                     std::span<const std::uint8_t> values);
Tensor decode_tensor(std::span<const std::byte> bytes);

}  // namespace patchcluster::io

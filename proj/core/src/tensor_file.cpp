#include "patchcluster/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "patchcluster/error.hpp"

namespace patchcluster::io {

namespace {

constexpr std::size_t kFixedHeaderBytes = 8;

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFF));
  out.push_back(static_cast<std::byte>(v >> 8));
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::byte>((v >> shift) & 0xFF));
  }
}

std::uint32_t get_u32(const std::byte* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::byte> encode_header(std::span<const std::size_t> dims,
                                     std::size_t value_count, DType dtype) {
  if (dims.size() != 2 && dims.size() != 3) {
    fail(Errc::invalid_argument,
         "tensor rank must be 2 or 3, got " + std::to_string(dims.size()));
  }
  std::size_t product = 1;
  for (std::size_t d : dims) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      fail(Errc::dimension_overflow,
           "dimension " + std::to_string(d) + " does not fit in 32 bits");
    }
    if (d != 0 && product > std::numeric_limits<std::size_t>::max() / d) {
      fail(Errc::dimension_overflow, "tensor element count overflows");
    }
    product *= d;
  }
  if (product != value_count) {
    fail(Errc::invalid_argument,
         "dims describe " + std::to_string(product) + " elements but " +
             std::to_string(value_count) + " values were given");
  }

  std::vector<std::byte> out;
  out.reserve(kFixedHeaderBytes + 4 * dims.size() +
              value_count * dtype_size(dtype));
  for (char c : kTensorMagic) out.push_back(static_cast<std::byte>(c));
  put_u16(out, kTensorVersion);
  out.push_back(static_cast<std::byte>(dtype));
  out.push_back(static_cast<std::byte>(dims.size()));
  for (std::size_t d : dims) put_u32(out, static_cast<std::uint32_t>(d));
  return out;
}

void write_bytes(const std::filesystem::path& path,
                 const std::vector<std::byte>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

}  // namespace

std::size_t dtype_size(DType dtype) noexcept {
  return dtype == DType::f32 ? 4 : 1;
}

std::size_t Tensor::element_count() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

const std::vector<float>& Tensor::f32() const {
  if (const auto* v = std::get_if<std::vector<float>>(&values)) return *v;
  fail(Errc::invalid_argument, "tensor holds uint8 values, float32 expected");
}

const std::vector<std::uint8_t>& Tensor::u8() const {
  if (const auto* v = std::get_if<std::vector<std::uint8_t>>(&values)) return *v;
  fail(Errc::invalid_argument, "tensor holds float32 values, uint8 expected");
}

std::vector<std::byte> encode_tensor(std::span<const std::size_t> dims,
                                     std::span<const float> values) {
  auto out = encode_header(dims, values.size(), DType::f32);
  for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::vector<std::byte> encode_tensor(std::span<const std::size_t> dims,
                                     std::span<const std::uint8_t> values) {
  auto out = encode_header(dims, values.size(), DType::u8);
  for (std::uint8_t v : values) out.push_back(static_cast<std::byte>(v));
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 ||
      std::memcmp(bytes.data(), kTensorMagic, sizeof(kTensorMagic)) != 0) {
    fail(Errc::bad_magic, "bad magic: not a PCFB tensor file");
  }
  if (bytes.size() < kFixedHeaderBytes) {
    fail(Errc::truncated_payload, "truncated header");
  }
  const auto version = static_cast<std::uint16_t>(
      static_cast<unsigned>(bytes[4]) | (static_cast<unsigned>(bytes[5]) << 8));
  if (version != kTensorVersion) {
    fail(Errc::unsupported_version,
         "unsupported tensor file version " + std::to_string(version));
  }
  const auto dtype_code = static_cast<unsigned>(bytes[6]);
  if (dtype_code > 1) {
    fail(Errc::unsupported_dtype,
         "unsupported dtype code " + std::to_string(dtype_code));
  }
  const auto dtype = static_cast<DType>(dtype_code);
  const auto ndim = static_cast<std::size_t>(bytes[7]);
  if (ndim != 2 && ndim != 3) {
    fail(Errc::invalid_argument,
         "tensor rank must be 2 or 3, got " + std::to_string(ndim));
  }
  const std::size_t header_bytes = kFixedHeaderBytes + 4 * ndim;
  if (bytes.size() < header_bytes) {
    fail(Errc::truncated_payload, "truncated header");
  }

  Tensor t;
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    const std::uint32_t d = get_u32(bytes.data() + kFixedHeaderBytes + 4 * i);
    t.dims.push_back(d);
    if (d != 0 && count > std::numeric_limits<std::size_t>::max() / 8 / d) {
      fail(Errc::dimension_overflow, "tensor element count overflows");
    }
    count *= d;
  }
  const std::size_t payload = count * dtype_size(dtype);
  const std::size_t available = bytes.size() - header_bytes;
  if (available < payload) {
    fail(Errc::truncated_payload,
         "truncated payload: expected " + std::to_string(payload) +
             " bytes, found " + std::to_string(available));
  }
  if (available > payload) {
    fail(Errc::oversized_payload,
         "payload has " + std::to_string(available - payload) +
             " trailing bytes");
  }

  const std::byte* p = bytes.data() + header_bytes;
  if (dtype == DType::f32) {
    std::vector<float> v(count);
    for (std::size_t i = 0; i < count; ++i) {
      v[i] = std::bit_cast<float>(get_u32(p + 4 * i));
    }
    t.values = std::move(v);
  } else {
    std::vector<std::uint8_t> v(count);
    std::memcpy(v.data(), p, count);
    t.values = std::move(v);
  }
  return t;
}

void write_tensor(const std::filesystem::path& path,
                  std::span<const std::size_t> dims,
                  std::span<const float> values) {
  write_bytes(path, encode_tensor(dims, values));
}

void write_tensor(const std::filesystem::path& path,
                  std::span<const std::size_t> dims,
                  std::span<const std::uint8_t> values) {
  write_bytes(path, encode_tensor(dims, values));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_failure, "cannot open tensor file: " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(size));
  if (!in) fail(Errc::io_failure, "read failed: " + path.string());
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace patchcluster::io

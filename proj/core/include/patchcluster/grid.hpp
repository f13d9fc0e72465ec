#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace patchcluster {

/// W x H grid of C-dimensional vectors stored channel-last with w as the
/// slowest axis: element (w, h, c) lives at ((w * height) + h) * channels + c.
/// This matches the on-disk W x H x C feature tensor layout.
struct VectorGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<float> values;

  VectorGrid() = default;
  VectorGrid(std::size_t w, std::size_t h, std::size_t c, float fill = 0.0f)
      : width(w), height(h), channels(c), values(w * h * c, fill) {}

  std::size_t locations() const noexcept { return width * height; }
  std::size_t offset(std::size_t w, std::size_t h) const noexcept {
    return (w * height + h) * channels;
  }
  std::span<float> at(std::size_t w, std::size_t h) noexcept {
    return {values.data() + offset(w, h), channels};
  }
  std::span<const float> at(std::size_t w, std::size_t h) const noexcept {
    return {values.data() + offset(w, h), channels};
  }
};

/// Row-major H x W image plane (pixel (y, x) at y * width + x).
template <class T>
struct Plane {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(std::size_t h, std::size_t w, T fill = T{})
      : height(h), width(w), data(h * w, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  T& at(std::size_t y, std::size_t x) noexcept { return data[y * width + x]; }
  const T& at(std::size_t y, std::size_t x) const noexcept {
    return data[y * width + x];
  }
};

using Mask = Plane<unsigned char>;
using ScalarImage = Plane<float>;

}  // namespace patchcluster

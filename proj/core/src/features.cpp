#include "patchcluster/features.hpp"

#include <cmath>

#include "patchcluster/error.hpp"
#include "patchcluster/tensor_file.hpp"

namespace patchcluster::features {

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;  // weight of hi
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale =
      out > 1 ? static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
  for (std::size_t i = 0; i < out; ++i) {
    const double x = static_cast<double>(i) * scale;
    std::size_t lo = static_cast<std::size_t>(std::floor(x));
    if (lo > in - 1) lo = in - 1;
    const std::size_t hi = lo + 1 < in ? lo + 1 : lo;
    t[i] = {lo, hi, hi == lo ? 0.0 : x - static_cast<double>(lo)};
  }
  return t;
}

}  // namespace

VectorGrid bilinear_resize(const VectorGrid& map, std::size_t out_width,
                           std::size_t out_height) {
  if (map.width == 0 || map.height == 0 || out_width == 0 || out_height == 0) {
    fail(Errc::invalid_argument, "bilinear_resize requires non-empty grids");
  }
  if (out_width == map.width && out_height == map.height) return map;

  const auto tw = taps(map.width, out_width);
  const auto th = taps(map.height, out_height);
  const std::size_t c = map.channels;
  VectorGrid out(out_width, out_height, c);
  for (std::size_t w = 0; w < out_width; ++w) {
    const Tap& a = tw[w];
    for (std::size_t h = 0; h < out_height; ++h) {
      const Tap& b = th[h];
      const float* p00 = map.values.data() + map.offset(a.lo, b.lo);
      const float* p01 = map.values.data() + map.offset(a.lo, b.hi);
      const float* p10 = map.values.data() + map.offset(a.hi, b.lo);
      const float* p11 = map.values.data() + map.offset(a.hi, b.hi);
      float* dst = out.values.data() + out.offset(w, h);
      const double w00 = (1 - a.frac) * (1 - b.frac);
      const double w01 = (1 - a.frac) * b.frac;
      const double w10 = a.frac * (1 - b.frac);
      const double w11 = a.frac * b.frac;
      for (std::size_t k = 0; k < c; ++k) {
        dst[k] = static_cast<float>(w00 * p00[k] + w01 * p01[k] +
                                    w10 * p10[k] + w11 * p11[k]);
      }
    }
  }
  return out;
}

PatchFeatureMap align_and_concat(std::span<const LayerFeatureMap> layers,
                                 std::string image_id) {
  if (layers.empty()) {
    fail(Errc::invalid_argument, "align_and_concat: empty layer list");
  }
  const std::size_t width = layers.front().grid.width;
  const std::size_t height = layers.front().grid.height;
  std::size_t dim = 0;
  for (const auto& l : layers) {
    if (l.grid.width > width || l.grid.height > height) {
      fail(Errc::invalid_argument,
           "align_and_concat: layers must be ordered finest grid first");
    }
    dim += l.grid.channels;
  }

  PatchFeatureMap out{std::move(image_id), VectorGrid(width, height, dim)};
  std::size_t channel_offset = 0;
  for (const auto& layer : layers) {
    const VectorGrid aligned = bilinear_resize(layer.grid, width, height);
    const std::size_t c = aligned.channels;
    for (std::size_t w = 0; w < width; ++w) {
      for (std::size_t h = 0; h < height; ++h) {
        const auto src = aligned.at(w, h);
        auto dst = out.grid.at(w, h);
        std::copy(src.begin(), src.end(), dst.begin() + channel_offset);
      }
    }
    channel_offset += c;
  }
  return out;
}

PatchFeatureMap local_average_pool(const PatchFeatureMap& map,
                                   std::size_t patch_size) {
  if (patch_size == 0 || patch_size % 2 == 0) {
    fail(Errc::invalid_argument,
         "patch_size must be odd and positive, got " + std::to_string(patch_size));
  }
  if (patch_size == 1) return map;

  const std::size_t r = patch_size / 2;
  const std::size_t W = map.width(), H = map.height(), C = map.dim();
  PatchFeatureMap out{map.image_id, VectorGrid(W, H, C)};
  std::vector<double> acc(C);
  for (std::size_t w = 0; w < W; ++w) {
    const std::size_t w0 = w >= r ? w - r : 0;
    const std::size_t w1 = std::min(W - 1, w + r);
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t h0 = h >= r ? h - r : 0;
      const std::size_t h1 = std::min(H - 1, h + r);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t ww = w0; ww <= w1; ++ww) {
        for (std::size_t hh = h0; hh <= h1; ++hh) {
          const auto v = map.grid.at(ww, hh);
          for (std::size_t k = 0; k < C; ++k) acc[k] += v[k];
        }
      }
      const double n = static_cast<double>((w1 - w0 + 1) * (h1 - h0 + 1));
      auto dst = out.grid.at(w, h);
      for (std::size_t k = 0; k < C; ++k) dst[k] = static_cast<float>(acc[k] / n);
    }
  }
  return out;
}

LayerFeatureMap load_layer(const std::filesystem::path& path, int stage_id) {
  io::Tensor t = io::read_tensor(path);
  if (t.dims.size() != 3) {
    fail(Errc::shape_mismatch,
         "feature map must be 3-D (W x H x C): " + path.string());
  }
  if (t.dtype() != io::DType::f32) {
    fail(Errc::unsupported_dtype, "feature map must be float32: " + path.string());
  }
  LayerFeatureMap layer;
  layer.stage_id = stage_id;
  layer.grid.width = t.dims[0];
  layer.grid.height = t.dims[1];
  layer.grid.channels = t.dims[2];
  layer.grid.values = std::get<std::vector<float>>(std::move(t.values));
  for (float v : layer.grid.values) {
    if (!std::isfinite(v)) {
      fail(Errc::invalid_argument, "non-finite feature value in " + path.string());
    }
  }
  return layer;
}

PatchFeatureMap load_patch_features(
    std::span<const std::filesystem::path> stage_paths, std::string image_id,
    std::size_t patch_size) {
  std::vector<LayerFeatureMap> layers;
  layers.reserve(stage_paths.size());
  for (std::size_t i = 0; i < stage_paths.size(); ++i) {
    layers.push_back(load_layer(stage_paths[i], static_cast<int>(i)));
  }
  return local_average_pool(align_and_concat(layers, std::move(image_id)),
                            patch_size);
}

void save_grid(const std::filesystem::path& path, const VectorGrid& grid) {
  const std::size_t dims[3] = {grid.width, grid.height, grid.channels};
  io::write_tensor(path, dims, grid.values);
}

}  // namespace patchcluster::features

#include "patchcluster/postprocess.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "patchcluster/error.hpp"
#include "patchcluster/features.hpp"

namespace patchcluster::scoring {

ScalarImage upsample_scores(const VectorGrid& scores, std::size_t out_height,
                            std::size_t out_width) {
  if (scores.channels != 1) {
    fail(Errc::shape_mismatch, "score grid must have one channel");
  }
  const VectorGrid up = features::bilinear_resize(scores, out_width, out_height);
  ScalarImage img(out_height, out_width);
  for (std::size_t x = 0; x < out_width; ++x) {
    for (std::size_t y = 0; y < out_height; ++y) {
      img.at(y, x) = up.at(x, y)[0];
    }
  }
  return img;
}

std::size_t gaussian_radius(double sigma) {
  return static_cast<std::size_t>(std::ceil(4.0 * sigma));
}

ScalarImage gaussian_smooth(const ScalarImage& image, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(Errc::invalid_argument, "gaussian sigma must be positive");
  }
  const std::size_t r = gaussian_radius(sigma);
  std::vector<double> kernel(2 * r + 1);
  for (std::size_t i = 0; i <= 2 * r; ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(r);
    kernel[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
  }

  const std::size_t H = image.height, W = image.width;
  // One pass along an axis of length n with the given stride.
  auto pass = [&](const std::vector<double>& src, std::vector<double>& dst,
                  std::size_t lines, std::size_t n, std::size_t line_stride,
                  std::size_t step) {
    for (std::size_t l = 0; l < lines; ++l) {
      const std::size_t base = l * line_stride;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= r ? i - r : 0;
        const std::size_t hi = std::min(n - 1, i + r);
        double acc = 0.0, norm = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
          const double g = kernel[j + r - i];
          acc += g * src[base + j * step];
          norm += g;
        }
        dst[base + i * step] = acc / norm;
      }
    }
  };

  std::vector<double> a(image.data.begin(), image.data.end());
  std::vector<double> b(a.size());
  pass(a, b, H, W, W, 1);  // along x within each row
  pass(b, a, W, H, 1, W);  // along y within each column
  ScalarImage out(H, W);
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = static_cast<float>(a[i]);
  return out;
}

}  // namespace patchcluster::scoring

#include "patchcluster/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "patchcluster/error.hpp"

namespace patchcluster::eval {

namespace {

void check_shapes(std::span<const ScalarImage> maps, std::span<const Mask> masks) {
  if (maps.size() != masks.size()) {
    fail(Errc::shape_mismatch, "got " + std::to_string(maps.size()) +
                                   " score maps but " + std::to_string(masks.size()) +
                                   " masks");
  }
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].height != masks[i].height || maps[i].width != masks[i].width) {
      fail(Errc::shape_mismatch, "score map " + std::to_string(i) +
                                     " does not match its mask shape");
    }
  }
}

std::size_t count_at_least(const std::vector<float>& sorted, double t) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), t,
                                   [](float v, double x) { return v < x; });
  return static_cast<std::size_t>(sorted.end() - it);
}

}  // namespace

double auroc(std::span<const float> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    fail(Errc::shape_mismatch, "scores and labels differ in length");
  }
  std::vector<std::pair<float, bool>> data(scores.size());
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) fail(Errc::invalid_argument, "non-finite score");
    data[i] = {scores[i], labels[i] != 0};
    pos += labels[i] != 0;
  }
  const std::uint64_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) {
    fail(Errc::undefined_metric, "undefined metric: AUROC needs both classes");
  }
  std::sort(data.begin(), data.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // twice_u = 2 * U, kept integral so the only rounding is the final division.
  std::uint64_t twice_u = 0, neg_below = 0;
  for (std::size_t i = 0; i < data.size();) {
    std::size_t j = i;
    std::uint64_t p = 0, n = 0;
    while (j < data.size() && data[j].first == data[i].first) {
      (data[j].second ? p : n) += 1;
      ++j;
    }
    twice_u += 2 * p * neg_below + p * n;
    neg_below += n;
    i = j;
  }
  return static_cast<double>(twice_u) / (2.0 * double(pos) * double(neg));
}

double pixel_auroc(std::span<const ScalarImage> maps, std::span<const Mask> masks) {
  check_shapes(maps, masks);
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    scores.insert(scores.end(), maps[i].data.begin(), maps[i].data.end());
    labels.insert(labels.end(), masks[i].data.begin(), masks[i].data.end());
  }
  return auroc(scores, labels);
}

std::vector<Region> connected_components(const Mask& mask) {
  const std::size_t H = mask.height, W = mask.width;
  std::vector<std::uint8_t> seen(H * W, 0);
  std::vector<Region> regions;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < H * W; ++start) {
    if (mask.data[start] == 0 || seen[start]) continue;
    Region region;
    region.id = regions.size();
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      region.pixels.push_back(p);
      const std::size_t y = p / W, x = p % W;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const auto ny = static_cast<std::ptrdiff_t>(y) + dy;
          const auto nx = static_cast<std::ptrdiff_t>(x) + dx;
          if (ny < 0 || nx < 0 || ny >= std::ptrdiff_t(H) || nx >= std::ptrdiff_t(W)) {
            continue;
          }
          const std::size_t q = std::size_t(ny) * W + std::size_t(nx);
          if (mask.data[q] != 0 && !seen[q]) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<double> quantile_thresholds(std::span<const ScalarImage> maps,
                                        std::size_t count) {
  if (count < 2) fail(Errc::invalid_argument, "need at least two PRO thresholds");
  std::vector<float> pooled;
  for (const auto& m : maps) pooled.insert(pooled.end(), m.data.begin(), m.data.end());
  if (pooled.empty()) fail(Errc::undefined_metric, "undefined metric: no pixels");
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> out;
  out.reserve(count);
  const double last = static_cast<double>(pooled.size() - 1);
  for (std::size_t j = count; j-- > 0;) {
    const double level = static_cast<double>(j) / static_cast<double>(count - 1);
    const auto idx = static_cast<std::size_t>(std::llround(level * last));
    const double t = pooled[idx];
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

std::vector<ProPoint> pro_curve(std::span<const ScalarImage> maps,
                                std::span<const Mask> masks,
                                std::span<const double> thresholds) {
  check_shapes(maps, masks);
  std::vector<float> normal;
  std::vector<std::vector<float>> regions;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (std::size_t p = 0; p < masks[i].size(); ++p) {
      if (masks[i].data[p] == 0) normal.push_back(maps[i].data[p]);
    }
    for (const auto& region : connected_components(masks[i])) {
      std::vector<float> s;
      s.reserve(region.pixels.size());
      for (std::size_t p : region.pixels) s.push_back(maps[i].data[p]);
      std::sort(s.begin(), s.end());
      regions.push_back(std::move(s));
    }
  }
  if (regions.empty()) {
    fail(Errc::undefined_metric, "undefined metric: PRO needs an anomalous region");
  }
  if (normal.empty()) {
    fail(Errc::undefined_metric, "undefined metric: PRO needs normal pixels");
  }
  std::sort(normal.begin(), normal.end());

  std::vector<ProPoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    double overlap = 0.0;
    for (const auto& r : regions) {
      overlap += static_cast<double>(count_at_least(r, t)) / static_cast<double>(r.size());
    }
    curve.push_back({t,
                     static_cast<double>(count_at_least(normal, t)) /
                         static_cast<double>(normal.size()),
                     overlap / static_cast<double>(regions.size())});
  }
  std::sort(curve.begin(), curve.end(), [](const ProPoint& a, const ProPoint& b) {
    return a.fpr < b.fpr || (a.fpr == b.fpr && a.pro < b.pro);
  });
  return curve;
}

double integrate_pro(std::span<const ProPoint> curve, double fpr_limit) {
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) {
    fail(Errc::invalid_argument, "fpr_limit must lie in (0, 1]");
  }
  double area = 0.0;
  double prev_fpr = 0.0, prev_pro = 0.0;
  for (const auto& p : curve) {
    if (p.fpr >= fpr_limit) {
      if (p.fpr > prev_fpr) {
        const double frac = (fpr_limit - prev_fpr) / (p.fpr - prev_fpr);
        const double pro_at_limit = prev_pro + frac * (p.pro - prev_pro);
        area += 0.5 * (prev_pro + pro_at_limit) * (fpr_limit - prev_fpr);
      }
      prev_fpr = fpr_limit;
      break;
    }
    area += 0.5 * (prev_pro + p.pro) * (p.fpr - prev_fpr);
    prev_fpr = p.fpr;
    prev_pro = p.pro;
  }
  return area / fpr_limit;
}

double pro_score_at(std::span<const ScalarImage> maps, std::span<const Mask> masks,
                    std::span<const double> thresholds, double fpr_limit) {
  const auto curve = pro_curve(maps, masks, thresholds);
  return integrate_pro(curve, fpr_limit);
}

double pro_score(std::span<const ScalarImage> maps, std::span<const Mask> masks,
                 double fpr_limit, std::size_t thresholds) {
  const auto levels = quantile_thresholds(maps, thresholds);
  return pro_score_at(maps, masks, levels, fpr_limit);
}

}  // namespace patchcluster::eval

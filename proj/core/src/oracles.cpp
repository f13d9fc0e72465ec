#include "patchcluster/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace patchcluster::oracle {

namespace {

struct Entry {
  double d;
  std::size_t i;
};

std::vector<Entry> sorted_by_distance(std::span<const float> points, std::size_t dim,
                                      std::span<const float> query) {
  const std::size_t n = points.size() / dim;
  std::vector<Entry> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back({euclidean(query, row(points, dim, i)), i});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.i < b.i;
  });
  return all;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::span<const float> row(std::span<const float> points, std::size_t dim, std::size_t i) {
  return points.subspan(i * dim, dim);
}

double euclidean(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = double(a[k]) - double(b[k]);
    s += diff * diff;
  }
  return std::sqrt(s);
}

Neighbors knn_oracle(std::span<const float> points, std::size_t dim,
                     std::span<const float> query, std::size_t k,
                     std::size_t start_index) {
  const auto all = sorted_by_distance(points, dim, query);
  Neighbors out;
  for (std::size_t j = start_index - 1; j < start_index - 1 + k && j < all.size(); ++j) {
    out.distances.push_back(all[j].d);
    out.indices.push_back(all[j].i);
  }
  return out;
}

std::vector<std::size_t> greedy_oracle(std::span<const float> points, std::size_t dim,
                                       std::size_t m, std::uint64_t seed) {
  const std::size_t n = points.size() / dim;
  std::vector<std::size_t> selected{static_cast<std::size_t>(seed % n)};
  std::vector<bool> taken(n, false);
  taken[selected[0]] = true;
  while (selected.size() < m) {
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double nearest = INFINITY;
      for (std::size_t s : selected) {
        nearest = std::min(nearest, euclidean(row(points, dim, i), row(points, dim, s)));
      }
      if (nearest > best) {
        best = nearest;
        best_i = i;
      }
    }
    selected.push_back(best_i);
    taken[best_i] = true;
  }
  return selected;
}

double auroc_oracle(std::span<const float> scores, std::span<const std::uint8_t> labels) {
  double hits = 0.0;
  double pairs = 0.0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] == 0) continue;
    for (std::size_t n = 0; n < scores.size(); ++n) {
      if (labels[n] != 0) continue;
      pairs += 1.0;
      if (scores[p] > scores[n]) {
        hits += 1.0;
      } else if (scores[p] == scores[n]) {
        hits += 0.5;
      }
    }
  }
  return hits / pairs;
}

std::vector<std::size_t> component_labels_oracle(const Mask& mask) {
  const std::size_t H = mask.height, W = mask.width;
  std::vector<std::size_t> parent(H * W);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      if (!mask.at(y, x)) continue;
      // Union with already-visited 8-neighbours (W, NW, N, NE).
      const int offsets[4][2] = {{0, -1}, {-1, -1}, {-1, 0}, {-1, 1}};
      for (const auto& o : offsets) {
        const long ny = long(y) + o[0], nx = long(x) + o[1];
        if (ny < 0 || nx < 0 || nx >= long(W)) continue;
        if (!mask.at(std::size_t(ny), std::size_t(nx))) continue;
        const std::size_t a = find_root(parent, y * W + x);
        const std::size_t b = find_root(parent, std::size_t(ny) * W + std::size_t(nx));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::size_t> labels(H * W, 0);
  std::vector<std::size_t> root_label(H * W, 0);
  std::size_t next = 1;
  for (std::size_t p = 0; p < H * W; ++p) {
    if (!mask.data[p]) continue;
    const std::size_t r = find_root(parent, p);
    if (root_label[r] == 0) root_label[r] = next++;
    labels[p] = root_label[r];
  }
  return labels;
}

std::size_t component_count_oracle(const Mask& mask) {
  const auto labels = component_labels_oracle(mask);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

double pro_oracle(std::span<const ScalarImage> maps, std::span<const Mask> masks,
                  std::span<const double> thresholds, double fpr_limit) {
  std::vector<std::vector<std::size_t>> labels;
  std::vector<std::size_t> counts;
  for (const auto& m : masks) {
    labels.push_back(component_labels_oracle(m));
    counts.push_back(component_count_oracle(m));
  }

  std::vector<std::pair<double, double>> points;  // (fpr, pro)
  for (double t : thresholds) {
    double normal = 0.0, false_pos = 0.0, pro_sum = 0.0, regions = 0.0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      std::vector<double> size(counts[i] + 1, 0.0), hit(counts[i] + 1, 0.0);
      for (std::size_t p = 0; p < maps[i].data.size(); ++p) {
        const bool positive = maps[i].data[p] >= t;
        if (labels[i][p] == 0) {
          normal += 1.0;
          false_pos += positive ? 1.0 : 0.0;
        } else {
          size[labels[i][p]] += 1.0;
          hit[labels[i][p]] += positive ? 1.0 : 0.0;
        }
      }
      for (std::size_t r = 1; r <= counts[i]; ++r) {
        pro_sum += hit[r] / size[r];
        regions += 1.0;
      }
    }
    points.emplace_back(false_pos / normal, pro_sum / regions);
  }
  points.emplace_back(0.0, 0.0);
  std::sort(points.begin(), points.end());

  double area = 0.0;
  for (std::size_t j = 1; j < points.size(); ++j) {
    const auto [f0, p0] = points[j - 1];
    auto [f1, p1] = points[j];
    if (f0 >= fpr_limit) break;
    if (f1 > fpr_limit) {
      p1 = p0 + (p1 - p0) * (fpr_limit - f0) / (f1 - f0);
      f1 = fpr_limit;
    }
    area += (f1 - f0) * (p0 + p1) / 2.0;
  }
  return area / fpr_limit;
}

double pro_oracle_dense(std::span<const ScalarImage> maps, std::span<const Mask> masks,
                        double fpr_limit) {
  std::set<double> distinct;
  for (const auto& m : maps) {
    for (float v : m.data) distinct.insert(v);
  }
  const std::vector<double> thresholds(distinct.begin(), distinct.end());
  return pro_oracle(maps, masks, thresholds, fpr_limit);
}

double patch_score_oracle(std::span<const float> points, std::size_t dim,
                          std::span<const float> query, std::size_t k,
                          std::size_t start_index) {
  const auto nb = knn_oracle(points, dim, query, k, start_index);
  double s = 0.0;
  for (std::size_t idx : nb.indices) s += euclidean(query, row(points, dim, idx));
  return s / double(k);
}

double image_score_oracle(double max_patch_score, std::span<const double> distances) {
  double denom = 0.0;
  for (double d : distances) denom += std::exp(d);
  return (1.0 - std::exp(max_patch_score) / denom) * max_patch_score;
}

double lof_oracle(std::span<const float> points, std::size_t dim,
                  std::span<const float> query, std::size_t k, std::size_t start_index) {
  const std::size_t n = points.size() / dim;
  auto k_distance = [&](std::size_t o) {
    return knn_oracle(points, dim, row(points, dim, o), k, 2).distances.back();
  };
  auto mean_reach = [&](std::span<const float> x, std::size_t start) {
    const auto nb = knn_oracle(points, dim, x, k, start);
    double s = 0.0;
    for (std::size_t j = 0; j < nb.indices.size(); ++j) {
      s += std::max(k_distance(nb.indices[j]), euclidean(x, row(points, dim, nb.indices[j])));
    }
    return s / double(nb.indices.size());
  };
  (void)n;
  const double reach_q = mean_reach(query, start_index);
  if (reach_q == 0.0) return 1.0;
  const double lrd_q = 1.0 / reach_q;
  const auto nb = knn_oracle(points, dim, query, k, start_index);
  double sum = 0.0;
  for (std::size_t o : nb.indices) sum += (1.0 / mean_reach(row(points, dim, o), 2)) / lrd_q;
  return sum / double(nb.indices.size());
}

}  // namespace patchcluster::oracle

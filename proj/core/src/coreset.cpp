#include "patchcluster/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <string>

#include "patchcluster/error.hpp"
#include "patchcluster/knn.hpp"
#include "patchcluster/parallel.hpp"

namespace patchcluster::bank {

namespace {

// Squared L2 with eight independent double accumulators so the loop
// vectorizes without reassociation flags.
double squared_distance(const float* a, const float* b, std::size_t d) noexcept {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double t = static_cast<double>(a[i + j]) - static_cast<double>(b[i + j]);
      acc[j] += t * t;
    }
  }
  for (std::size_t j = 0; i < d; ++i, ++j) {
    const double t = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc[j] += t * t;
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

std::vector<float> project(const MemoryBank& bank, std::size_t out_dim,
                           std::uint64_t seed) {
  const std::size_t d = bank.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(out_dim)));
  std::vector<double> matrix(out_dim * d);
  for (double& v : matrix) v = normal(rng);

  std::vector<float> out(bank.size() * out_dim);
  for (std::size_t r = 0; r < bank.size(); ++r) {
    const auto x = bank.row(r);
    for (std::size_t p = 0; p < out_dim; ++p) {
      const double* g = matrix.data() + p * d;
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += g[k] * x[k];
      out[r * out_dim + p] = static_cast<float>(s);
    }
  }
  return out;
}

struct Best {
  double value = -1.0;
  std::size_t index = 0;
};

}  // namespace

std::size_t coreset_target(double ratio, std::size_t n) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    fail(Errc::invalid_argument,
         "coreset ratio must lie in (0, 1], got " + std::to_string(ratio));
  }
  const auto m = static_cast<std::size_t>(std::llround(ratio * double(n)));
  return std::clamp<std::size_t>(m, 1, n);
}

std::vector<std::size_t> greedy_kcenter(const MemoryBank& bank, std::size_t m,
                                        std::uint64_t seed,
                                        std::optional<std::size_t> projection_dim,
                                        std::size_t workers) {
  const std::size_t n = bank.size();
  if (m == 0 || m > n) {
    fail(Errc::invalid_argument, "coreset size must lie in [1, N]");
  }

  std::vector<float> projected;
  const float* data = bank.features().data();
  std::size_t d = bank.dim();
  if (projection_dim) {
    if (*projection_dim == 0) {
      fail(Errc::invalid_argument, "projection_dim must be positive");
    }
    projected = project(bank, *projection_dim, seed);
    data = projected.data();
    d = *projection_dim;
  }

  std::vector<std::size_t> selected;
  selected.reserve(m);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::size_t current = static_cast<std::size_t>(seed % n);

  const std::size_t chunks = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<Best> partial(chunks);

  while (true) {
    selected.push_back(current);
    min_dist[current] = -1.0;  // never chosen again
    if (selected.size() == m) break;

    const float* center = data + current * d;
    const std::size_t chunk = (n + chunks - 1) / chunks;
    parallel_for(chunks, workers, [&](std::size_t c0, std::size_t c1) {
      for (std::size_t c = c0; c < c1; ++c) {
        Best best;
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
          double& md = min_dist[i];
          if (md < 0.0) continue;
          const double dist = squared_distance(data + i * d, center, d);
          if (dist < md) md = dist;
          if (md > best.value) best = {md, i};
        }
        partial[c] = best;
      }
    });
    Best best;
    for (const Best& b : partial) {
      if (b.value > best.value) best = b;  // chunks ascend, so ties keep lower index
    }
    current = best.index;
  }
  return selected;
}

MemoryBank coreset_subsample(const MemoryBank& bank, double ratio,
                             std::uint64_t seed,
                             std::optional<std::size_t> projection_dim,
                             std::size_t workers) {
  const std::size_t m = coreset_target(ratio, bank.size());
  const auto rows = greedy_kcenter(bank, m, seed, projection_dim, workers);
  return bank.select(rows, BankMetadata{ratio, seed, projection_dim});
}

double coverage_radius(const MemoryBank& bank,
                       const std::vector<std::size_t>& selected) {
  double radius = 0.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : selected) {
      best = std::min(best, exact_distance(bank.row(i), bank.row(s)));
    }
    radius = std::max(radius, best);
  }
  return radius;
}

}  // namespace patchcluster::bank

#include "patchcluster/knn.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "patchcluster/error.hpp"
#include "patchcluster/parallel.hpp"

namespace patchcluster::bank {

namespace {

using RowMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

constexpr std::size_t kQueryBlock = 256;
constexpr std::size_t kBankBlock = 2048;
constexpr std::size_t kChunk = 64;

struct Ranked {
  double distance;
  std::size_t index;
  bool operator<(const Ranked& o) const noexcept {
    return distance < o.distance || (distance == o.distance && index < o.index);
  }
};

NeighborSet finish(std::vector<Ranked>& ranked, std::size_t keep,
                   std::size_t k, std::size_t start_index) {
  std::sort(ranked.begin(), ranked.end());
  NeighborSet out;
  out.start_index = start_index;
  out.distances.reserve(k);
  out.indices.reserve(k);
  for (std::size_t i = start_index - 1; i < keep; ++i) {
    out.distances.push_back(ranked[i].distance);
    out.indices.push_back(ranked[i].index);
  }
  return out;
}

NeighborSet full_scan(const MemoryBank& bank, std::span<const float> query,
                      std::size_t k, std::size_t start_index) {
  const std::size_t keep = start_index - 1 + k;
  std::vector<Ranked> all(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    all[i] = {exact_distance(query, bank.row(i)), i};
  }
  if (keep < all.size()) {
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                     all.end());
    all.resize(keep);
  }
  return finish(all, keep, k, start_index);
}

void validate(const MemoryBank& bank, std::size_t k, std::size_t start_index) {
  if (k == 0) fail(Errc::invalid_argument, "K must be at least 1");
  if (start_index == 0) fail(Errc::invalid_argument, "start_index must be at least 1");
  if (start_index - 1 + k > bank.size()) {
    fail(Errc::insufficient_bank_size,
         "insufficient bank size: K=" + std::to_string(k) +
             " with start_index=" + std::to_string(start_index) +
             " needs " + std::to_string(start_index - 1 + k) +
             " rows, bank has " + std::to_string(bank.size()));
  }
}

// Screened search for queries [q_begin, q_end).
void screened_range(const MemoryBank& bank, std::span<const float> queries,
                    std::size_t q_begin, std::size_t q_end, std::size_t k,
                    std::size_t start_index, std::vector<NeighborSet>& out) {
  const std::size_t n = bank.size();
  const std::size_t d = bank.dim();
  const std::size_t keep = start_index - 1 + k;
  const std::size_t capacity = std::min(n, keep + std::max<std::size_t>(8, keep / 8));

  const ConstRowMap bank_mat(bank.features().data(), static_cast<Eigen::Index>(n),
                             static_cast<Eigen::Index>(d));
  std::vector<float> bank_norms(n);
  double max_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    bank_norms[i] = static_cast<float>(bank.squared_norms()[i]);
    max_norm = std::max(max_norm, bank.squared_norms()[i]);
  }
  // Bound on |approx - (d^2 - |q|^2)| for the float screening expression
  // |b|^2 - 2 q.b, with a factor of two of slack.
  const double unit = std::ldexp(1.0, -24);
  const double err_scale = 2.0 * static_cast<double>(d + 4) * unit;

  RowMatrix dots;
  using Entry = std::pair<float, std::uint32_t>;
  std::vector<std::vector<Entry>> heaps;

  for (std::size_t qb = q_begin; qb < q_end; qb += kQueryBlock) {
    const std::size_t qn = std::min(kQueryBlock, q_end - qb);
    const ConstRowMap qmat(queries.data() + qb * d, static_cast<Eigen::Index>(qn),
                           static_cast<Eigen::Index>(d));
    heaps.assign(qn, {});
    for (auto& h : heaps) h.reserve(capacity);

    for (std::size_t bb = 0; bb < n; bb += kBankBlock) {
      const std::size_t bn = std::min(kBankBlock, n - bb);
      dots.noalias() = qmat * bank_mat.middleRows(static_cast<Eigen::Index>(bb),
                                                  static_cast<Eigen::Index>(bn))
                                  .transpose();
      const float* norms = bank_norms.data() + bb;
      for (std::size_t q = 0; q < qn; ++q) {
        auto& heap = heaps[q];
        float* row = dots.data() + q * bn;
        for (std::size_t j = 0; j < bn; ++j) row[j] = norms[j] - 2.0f * row[j];
        for (std::size_t c = 0; c < bn; c += kChunk) {
          const std::size_t ce = std::min(bn, c + kChunk);
          if (heap.size() == capacity) {
            // Skip the chunk unless some candidate beats the current worst.
            const float worst = heap.front().first;
            unsigned below = 0;
            for (std::size_t j = c; j < ce; ++j) {
              below += row[j] < worst ? 1u : 0u;
            }
            if (below == 0) continue;
          }
          for (std::size_t j = c; j < ce; ++j) {
            const float approx = row[j];
            if (heap.size() < capacity) {
              heap.emplace_back(approx, static_cast<std::uint32_t>(bb + j));
              std::push_heap(heap.begin(), heap.end());
            } else if (approx < heap.front().first) {
              std::pop_heap(heap.begin(), heap.end());
              heap.back() = {approx, static_cast<std::uint32_t>(bb + j)};
              std::push_heap(heap.begin(), heap.end());
            }
          }
        }
      }
    }

    for (std::size_t q = 0; q < qn; ++q) {
      const std::size_t qi = qb + q;
      const std::span<const float> query(queries.data() + qi * d, d);
      auto& heap = heaps[q];
      const double threshold = heap.front().first;

      std::vector<Ranked> ranked;
      ranked.reserve(heap.size());
      for (const auto& [approx, idx] : heap) {
        ranked.push_back({exact_distance(query, bank.row(idx)), idx});
      }
      std::sort(ranked.begin(), ranked.end());

      double qnorm = 0.0;
      for (float v : query) qnorm += static_cast<double>(v) * v;
      const double err = err_scale * (qnorm + max_norm);
      const double last = ranked[keep - 1].distance;
      const double last_sq = last * last;
      // Every excluded row has d^2 - |q|^2 >= threshold - err; certify that
      // this is strictly beyond the keep-th candidate.
      const double margin = 1e-12 * (qnorm + last_sq) + err;
      if (capacity == n || last_sq - qnorm < threshold - margin) {
        ranked.resize(keep);
        out[qi] = finish(ranked, keep, k, start_index);
      } else {
        out[qi] = full_scan(bank, query, k, start_index);
      }
    }
  }
}

}  // namespace

double exact_distance(std::span<const float> a, std::span<const float> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += diff * diff;
  }
  return std::sqrt(s);
}

NeighborSet query_knn(const MemoryBank& bank, std::span<const float> query,
                      std::size_t k, std::size_t start_index) {
  if (query.size() != bank.dim()) {
    fail(Errc::shape_mismatch, "query has dim " + std::to_string(query.size()) +
                                   ", bank has dim " + std::to_string(bank.dim()));
  }
  validate(bank, k, start_index);
  return full_scan(bank, query, k, start_index);
}

std::vector<NeighborSet> query_knn_batch(const MemoryBank& bank,
                                         std::span<const float> queries,
                                         std::size_t k, std::size_t start_index,
                                         std::size_t workers) {
  validate(bank, k, start_index);
  const std::size_t d = bank.dim();
  if (queries.size() % d != 0) {
    fail(Errc::shape_mismatch, "query matrix size is not a multiple of dim " +
                                   std::to_string(d));
  }
  const std::size_t q = queries.size() / d;
  std::vector<NeighborSet> out(q);
  if (q == 0) return out;

  // Split on query-block boundaries so each worker runs whole GEMM tiles.
  const std::size_t blocks = (q + kQueryBlock - 1) / kQueryBlock;
  parallel_for(blocks, workers, [&](std::size_t b0, std::size_t b1) {
    screened_range(bank, queries, b0 * kQueryBlock,
                   std::min(q, b1 * kQueryBlock), k, start_index, out);
  });
  return out;
}

}  // namespace patchcluster::bank

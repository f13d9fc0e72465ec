#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "patchcluster/memory_bank.hpp"

namespace patchcluster::bank {

/// K bank neighbours of a query, nearest first. start_index = 1 keeps the
/// nearest row; start_index = 2 drops it (self-exclusion when the query is
/// itself a bank row).
struct NeighborSet {
  std::vector<double> distances;
  std::vector<std::size_t> indices;
  std::size_t start_index = 1;

  std::size_t size() const noexcept { return distances.size(); }
  bool empty() const noexcept { return distances.empty(); }
};

/// Euclidean distance with per-element differences and a sequential sum in
/// double. Every distance the library reports goes through this function.
double exact_distance(std::span<const float> a, std::span<const float> b) noexcept;

/// Exact kNN: distances to all rows, ascending, ties broken by lower row
/// index; the first start_index - 1 entries are dropped and the next K
/// returned. Throws insufficient_bank_size when start_index - 1 + K > N.
NeighborSet query_knn(const MemoryBank& bank, std::span<const float> query,
                      std::size_t k, std::size_t start_index = 1);

/// Same result as query_knn for each row of the Q x D `queries` matrix.
/// Candidates are screened with a blocked float GEMM and re-ranked with
/// exact_distance; a query whose screening margin cannot certify the
/// result falls back to a full exact scan.
std::vector<NeighborSet> query_knn_batch(const MemoryBank& bank,
                                         std::span<const float> queries,
                                         std::size_t k,
                                         std::size_t start_index = 1,
                                         std::size_t workers = 1);

}  // namespace patchcluster::bank

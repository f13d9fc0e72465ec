#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "patchcluster/memory_bank.hpp"

namespace patchcluster::bank {

inline constexpr std::size_t kDefaultProjectionDim = 128;

/// max(1, round(ratio * n)).
std::size_t coreset_target(double ratio, std::size_t n);

/// Greedy k-center selection order: starts at row seed % N, then repeatedly
/// takes the row farthest (L2) from everything selected so far, lowest row
/// index on ties. With projection_dim set, distances are measured after a
/// seeded Gaussian random projection to that many dimensions.
std::vector<std::size_t> greedy_kcenter(
    const MemoryBank& bank, std::size_t m, std::uint64_t seed,
    std::optional<std::size_t> projection_dim = std::nullopt,
    std::size_t workers = 1);

/// Coreset bank of coreset_target(ratio, N) rows in selection order. Rows
/// are the original (unprojected) vectors with their provenance.
MemoryBank coreset_subsample(const MemoryBank& bank, double ratio,
                             std::uint64_t seed,
                             std::optional<std::size_t> projection_dim = std::nullopt,
                             std::size_t workers = 1);

/// Largest distance from any bank row to its nearest selected row.
double coverage_radius(const MemoryBank& bank,
                       const std::vector<std::size_t>& selected);

}  // namespace patchcluster::bank

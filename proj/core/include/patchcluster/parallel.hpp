#pragma once

#include <cstddef>
#include <functional>

namespace patchcluster {

/// Worker count from PATCHCLUSTER_WORKERS, else the hardware concurrency.
std::size_t default_workers();

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on up to
/// `workers` threads. The first exception thrown by any chunk is rethrown.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace patchcluster

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "patchcluster/knn.hpp"
#include "patchcluster/memory_bank.hpp"

namespace pc = patchcluster;

namespace {

pc::bank::MemoryBank random_bank(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::vector<float> rows(n * dim);
  for (auto& x : rows) x = g(rng);
  std::vector<pc::bank::Provenance> prov(n);
  return pc::bank::MemoryBank(dim, std::move(rows), std::move(prov), {"bench"});
}

// args: bank rows, dim, K
void BM_KnnBatch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const auto bank = random_bank(n, dim, 1);
  const std::size_t q = 784;
  std::vector<float> queries(bank.features().begin(), bank.features().begin() + q * dim);
  for (auto _ : state) {
    auto out = pc::bank::query_knn_batch(bank, queries, k, 2);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * q));
}
BENCHMARK(BM_KnnBatch)
    ->Args({20000, 64, 1})
    ->Args({20000, 64, 100})
    ->Args({78400, 64, 100})
    ->Args({20000, 256, 25})
    ->Unit(benchmark::kMillisecond);

void BM_KnnSingle(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto bank = random_bank(n, 64, 2);
  const auto query = bank.row(0);
  for (auto _ : state) {
    auto out = pc::bank::query_knn(bank, query, 100, 2);
    benchmark::DoNotOptimize(out.distances.data());
  }
}
BENCHMARK(BM_KnnSingle)->Arg(5000)->Arg(50000)->Unit(benchmark::kMicrosecond);

}  // namespace

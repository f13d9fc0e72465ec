#include <benchmark/benchmark.h>

#include <optional>
#include <random>
#include <vector>

#include "patchcluster/coreset.hpp"

namespace pc = patchcluster;

namespace {

pc::bank::MemoryBank random_bank(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g;
  std::vector<float> rows(n * dim);
  for (auto& x : rows) x = g(rng);
  std::vector<pc::bank::Provenance> prov(n);
  return pc::bank::MemoryBank(dim, std::move(rows), std::move(prov), {"bench"});
}

// args: bank rows, dim, selected rows, projection dim (0 = none)
void BM_GreedyKCenter(benchmark::State& state) {
  const auto bank = random_bank(static_cast<std::size_t>(state.range(0)),
                                static_cast<std::size_t>(state.range(1)));
  const auto m = static_cast<std::size_t>(state.range(2));
  std::optional<std::size_t> proj;
  if (state.range(3) > 0) proj = static_cast<std::size_t>(state.range(3));
  for (auto _ : state) {
    auto sel = pc::bank::greedy_kcenter(bank, m, 0, proj);
    benchmark::DoNotOptimize(sel.data());
  }
}
BENCHMARK(BM_GreedyKCenter)
    ->Args({20000, 64, 200, 0})
    ->Args({20000, 64, 2000, 0})
    ->Args({20000, 512, 200, 0})
    ->Args({20000, 512, 200, 128})
    ->Unit(benchmark::kMillisecond);

}  // namespace

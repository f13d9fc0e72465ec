#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "patchcluster/grid.hpp"
#include "patchcluster/metrics.hpp"

namespace pc = patchcluster;

namespace {

struct Maps {
  std::vector<pc::ScalarImage> maps;
  std::vector<pc::Mask> masks;
};

Maps random_maps(std::size_t count, std::size_t side) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u;
  Maps out;
  for (std::size_t i = 0; i < count; ++i) {
    pc::ScalarImage m(side, side);
    pc::Mask mask(side, side, 0);
    for (auto& v : m.data) v = u(rng);
    if (i % 4 == 0) {
      for (std::size_t y = side / 3; y < side / 2; ++y) {
        for (std::size_t x = side / 3; x < side / 2; ++x) {
          mask.at(y, x) = 1;
          m.at(y, x) += 0.5f;
        }
      }
    }
    out.maps.push_back(std::move(m));
    out.masks.push_back(std::move(mask));
  }
  return out;
}

void BM_PixelAuroc(benchmark::State& state) {
  const auto data = random_maps(static_cast<std::size_t>(state.range(0)), 224);
  for (auto _ : state) benchmark::DoNotOptimize(pc::eval::pixel_auroc(data.maps, data.masks));
}
BENCHMARK(BM_PixelAuroc)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ProScore(benchmark::State& state) {
  const auto data = random_maps(static_cast<std::size_t>(state.range(0)), 224);
  for (auto _ : state) benchmark::DoNotOptimize(pc::eval::pro_score(data.maps, data.masks));
}
BENCHMARK(BM_ProScore)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

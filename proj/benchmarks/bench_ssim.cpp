#include <random>

#include <benchmark/benchmark.h>

#include "meshstab/metrics.hpp"

using namespace meshstab;

static void BM_SsimPair(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0)), h = w * 3 / 4;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(0, 255);
  GrayFrame a(w, h), b(w, h);
  for (auto& v : a.data()) v = static_cast<std::uint8_t>(u(rng));
  for (auto& v : b.data()) v = static_cast<std::uint8_t>(u(rng));
  for (auto _ : state) benchmark::DoNotOptimize(ssim_pair(a, b));
  state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_SsimPair)->Arg(160)->Arg(320)->Arg(640);

BENCHMARK_MAIN();

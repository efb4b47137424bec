#include <random>

#include <benchmark/benchmark.h>

#include "meshstab/mesh.hpp"

using namespace meshstab;

static void BM_FrameMesh(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0, 639), uy(0, 479);
  std::vector<FrameFeature> f;
  for (int i = 0; i < state.range(0); ++i) f.push_back({i, {ux(rng), uy(rng)}});
  for (auto _ : state) benchmark::DoNotOptimize(build_frame_mesh(f, {640, 480}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FrameMesh)->RangeMultiplier(4)->Range(16, 1024);

BENCHMARK_MAIN();

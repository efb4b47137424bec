#include <benchmark/benchmark.h>

#include "meshstab/pipeline.hpp"
#include "meshstab/scene.hpp"

using namespace meshstab;

namespace {

SyntheticScene scene_of(int frames) {
  SceneSpec spec;
  spec.frame_count = frames;
  return synthesize_scene(spec, 7);
}

}  // namespace

static void BM_Stage1(benchmark::State& state) {
  const auto scene = scene_of(static_cast<int>(state.range(0)));
  const auto meshes = build_meshes(scene.shaky);
  for (auto _ : state) benchmark::DoNotOptimize(stabilize_stage1(scene.shaky, meshes, StageOneConfig{}));
}
BENCHMARK(BM_Stage1)->Arg(30)->Arg(120)->Unit(benchmark::kMillisecond);

static void BM_Stage1Iterative(benchmark::State& state) {
  const auto scene = scene_of(static_cast<int>(state.range(0)));
  const auto meshes = build_meshes(scene.shaky);
  StageOneConfig cfg;
  cfg.solver.force_iterative = true;
  for (auto _ : state) benchmark::DoNotOptimize(stabilize_stage1(scene.shaky, meshes, cfg));
}
BENCHMARK(BM_Stage1Iterative)->Arg(30)->Arg(120)->Unit(benchmark::kMillisecond);

static void BM_Pipeline(benchmark::State& state) {
  const auto scene = scene_of(120);
  for (auto _ : state) benchmark::DoNotOptimize(run_stabilization(scene.shaky, PipelineConfig{}));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

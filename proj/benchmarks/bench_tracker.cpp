#include <cmath>

#include <benchmark/benchmark.h>

#include "meshstab/scene.hpp"
#include "meshstab/tracker.hpp"

using namespace meshstab;

namespace {

GrayFrame textured(int w, int h, double shift) {
  GrayFrame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      f.at(x, y) = static_cast<std::uint8_t>(std::lround(scene_texture(5, {x - shift, y + 0.5 * shift})));
  return f;
}

}  // namespace

static void BM_DetectCorners(benchmark::State& state) {
  const auto f = textured(320, 240, 0);
  for (auto _ : state) benchmark::DoNotOptimize(detect_corners(f, TrackerConfig{}));
}
BENCHMARK(BM_DetectCorners)->Unit(benchmark::kMillisecond);

static void BM_TrackPair(benchmark::State& state) {
  const auto a = textured(320, 240, 0), b = textured(320, 240, 1.7);
  const auto pts = detect_corners(a, TrackerConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(track_frame_pair(a, b, pts, TrackerConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}
BENCHMARK(BM_TrackPair)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

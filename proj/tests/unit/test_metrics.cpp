#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "meshstab/metrics.hpp"
#include "meshstab/scene.hpp"
#include "reference.hpp"

using namespace meshstab;

namespace {

GrayFrame noise(std::uint64_t seed, int w = 48, int h = 36) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  GrayFrame f(w, h);
  for (auto& v : f.data()) v = static_cast<std::uint8_t>(u(rng));
  return f;
}

}  // namespace

TEST(Stability, StraightAndStatic) {
  std::vector<Point2> line, still(40, Point2{3, 4});
  for (int t = 0; t < 40; ++t) line.push_back({1.5 * t, -0.5 * t});
  EXPECT_NEAR(segment_stability(line), 1.0, 1e-12);
  EXPECT_EQ(segment_stability(still), 1.0);
}

TEST(Stability, Zigzag) {
  std::vector<Point2> z;
  for (int t = 0; t < 40; ++t) z.push_back({double(t), double(t % 2)});
  const double expect = std::sqrt(39.0 * 39.0 + 1.0) / (39.0 * std::sqrt(2.0));
  EXPECT_NEAR(segment_stability(z), expect, 1e-12);
  EXPECT_NEAR(segment_stability(z), 0.7074, 1e-3);
}

TEST(Stability, SegmentsAndMean) {
  std::vector<Point2> z;
  for (int t = 0; t < 95; ++t) z.push_back({double(t), double(t % 2)});
  std::vector<Point2> s(30, Point2{1, 1});
  const TrajectorySet ts({FeatureTrajectory{0, 0, z}, FeatureTrajectory{1, 5, s}}, 100, {200, 200});
  const auto r = stability_score(ts);
  ASSERT_TRUE(r.defined);
  ASSERT_EQ(r.segment_count(), 2u);
  EXPECT_NEAR(r.mean, 0.5 * (r.segment_scores[0] + r.segment_scores[1]), 1e-15);
  const TrajectorySet short_only({FeatureTrajectory{0, 0, s}}, 100, {200, 200});
  EXPECT_FALSE(stability_score(short_only).defined);
}

TEST(Stability, IsometryInvariantAndBounded) {
  std::mt19937_64 rng(1);
  const auto ts = meshstab::testing::random_instance(rng, 6, 90, {300, 300}, 50, 2.0);
  const auto base = stability_score(ts);
  std::vector<FeatureTrajectory> moved(ts.trajectories().begin(), ts.trajectories().end());
  const double c = std::cos(0.7), s = std::sin(0.7);
  for (auto& tr : moved)
    for (auto& p : tr.points) p = {c * p.x - s * p.y + 13, s * p.x + c * p.y - 7};
  const auto r = stability_score(TrajectorySet::unchecked(moved, ts.frame_count(), ts.frame_size()));
  ASSERT_EQ(r.segment_count(), base.segment_count());
  for (std::size_t k = 0; k < r.segment_count(); ++k) {
    EXPECT_NEAR(r.segment_scores[k], base.segment_scores[k], 1e-9);
    EXPECT_GT(base.segment_scores[k], 0.0);
    EXPECT_LE(base.segment_scores[k], 1.0);
  }
}

TEST(Ssim, IdenticalIsOne) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = noise(seed);
    EXPECT_EQ(ssim_pair(f, f), 1.0);
  }
  const GrayFrame flat(20, 20, 77);
  EXPECT_EQ(ssim_pair(flat, flat), 1.0);
}

TEST(Ssim, BlackWhite) {
  const GrayFrame a(32, 32, 0), b(32, 32, 255);
  EXPECT_LT(ssim_pair(a, b), 0.01);
}

TEST(Ssim, Symmetric) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = noise(seed), b = noise(seed + 100);
    EXPECT_EQ(ssim_pair(a, b), ssim_pair(b, a));
  }
}

TEST(Ssim, Preconditions) {
  EXPECT_THROW(ssim_pair(GrayFrame(20, 20), GrayFrame(21, 20)), std::invalid_argument);
  EXPECT_THROW(ssim_pair(GrayFrame(10, 20), GrayFrame(10, 20)), std::invalid_argument);
}

TEST(Ssim, DenseWindowOracle) {
  // Direct evaluation at every window position with the 2-D kernel.
  const auto a = noise(7, 24, 20), b = noise(8, 24, 20);
  double g[11], sum = 0;
  for (int k = 0; k < 11; ++k) sum += g[k] = std::exp(-((k - 5) * (k - 5)) / (2 * 1.5 * 1.5));
  for (double& v : g) v /= sum;
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double total = 0;
  int count = 0;
  for (int y0 = 0; y0 + 11 <= 20; ++y0)
    for (int x0 = 0; x0 + 11 <= 24; ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = 0; dy < 11; ++dy)
        for (int dx = 0; dx < 11; ++dx) {
          const double w = g[dy] * g[dx], va = a.at(x0 + dx, y0 + dy), vb = b.at(x0 + dx, y0 + dy);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  EXPECT_NEAR(ssim_pair(a, b), total / count, 1e-9);
}

TEST(VideoSsim, MeanOfPairs) {
  const std::vector<GrayFrame> same(4, noise(1));
  EXPECT_EQ(video_ssim(same).mean, 1.0);
  const std::vector<GrayFrame> three{noise(1), noise(2), noise(3)};
  const auto r = video_ssim(three);
  ASSERT_EQ(r.pair_values.size(), 2u);
  EXPECT_DOUBLE_EQ(r.mean, 0.5 * (ssim_pair(three[0], three[1]) + ssim_pair(three[1], three[2])));
  EXPECT_THROW(video_ssim(std::vector<GrayFrame>{noise(1)}), std::invalid_argument);
}

TEST(Jitter, SecondDifferences) {
  const TrajectorySet ts({FeatureTrajectory{0, 0, {{0, 0}, {1, 0}, {3, 0}, {6, 1}}}}, 4, {20, 20});
  // second differences (1, 0) and (1, 1)
  EXPECT_DOUBLE_EQ(residual_jitter_energy(ts), 3.0);
}

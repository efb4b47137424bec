#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "meshstab/scene.hpp"
#include "meshstab/tracker.hpp"

using namespace meshstab;

namespace {

GrayFrame textured(int w, int h, double shift_x = 0.0, double shift_y = 0.0, std::uint64_t seed = 17) {
  GrayFrame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      f.at(x, y) = static_cast<std::uint8_t>(std::lround(scene_texture(seed, {x - shift_x, y - shift_y})));
  return f;
}

// Brute-force minimum eigenvalue of the summed Sobel (scaled by 1/8)
// structure tensor over a block centred on (x, y).
double brute_min_eig(const GrayFrame& f, int x, int y, int block) {
  const int r = block / 2;
  double a = 0, b = 0, c = 0;
  for (int v = y - r; v <= y + r; ++v)
    for (int u = x - r; u <= x + r; ++u) {
      auto p = [&](int dx, int dy) { return double(f.at(u + dx, v + dy)); };
      const double gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1) - p(-1, -1) - 2 * p(-1, 0) - p(-1, 1)) / 8.0;
      const double gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1) - p(-1, -1) - 2 * p(0, -1) - p(1, -1)) / 8.0;
      a += gx * gx;
      b += gx * gy;
      c += gy * gy;
    }
  return 0.5 * (a + c - std::sqrt((a - c) * (a - c) + 4 * b * b));
}

}  // namespace

TEST(Corners, ConstantFrameHasNone) {
  const GrayFrame f(64, 48, 100);
  EXPECT_TRUE(detect_corners(f, TrackerConfig{}).empty());
}

TEST(Corners, WhiteSquareCorners) {
  GrayFrame f(80, 80, 0);
  for (int y = 25; y < 55; ++y)
    for (int x = 25; x < 55; ++x) f.at(x, y) = 255;
  TrackerConfig cfg;
  const auto corners = detect_scored_corners(f, cfg);
  ASSERT_GE(corners.size(), 4u);
  const std::array<Point2, 4> expected{Point2{24.5, 24.5}, {54.5, 24.5}, {24.5, 54.5}, {54.5, 54.5}};
  for (const auto& e : expected) {
    bool found = false;
    // the block response peaks up to the block radius inside the corner
    for (std::size_t k = 0; k < 4; ++k) found |= distance(corners[k].position, e) <= 4.0;
    EXPECT_TRUE(found) << e.x << "," << e.y;
  }
}

TEST(Corners, ResponseMatchesBruteForce) {
  const auto f = textured(40, 30);
  const int block = 7;
  const auto resp = corner_response(f, block);
  for (int y = 5; y < 25; y += 3)
    for (int x = 5; x < 35; x += 4) {
      const double expect = brute_min_eig(f, x, y, block);
      const double got = resp[static_cast<std::size_t>(y) * 40 + x];
      EXPECT_NEAR(got / std::max(1.0, expect), expect / std::max(1.0, expect), 1e-6) << x << "," << y;
    }
}

TEST(Corners, GlobalTargetBound) {
  const auto f = textured(200, 150);
  TrackerConfig cfg;
  const auto corners = detect_corners(f, cfg);
  EXPECT_LE(corners.size(), static_cast<std::size_t>(cfg.global_corner_target + cfg.grid_rows * cfg.grid_cols *
                                                                                   cfg.min_per_cell));
  EXPECT_GT(corners.size(), 100u);
}

TEST(Klt, ZeroFlow) {
  const auto f = textured(120, 90);
  TrackerConfig cfg;
  const auto pts = detect_corners(f, cfg);
  const auto tracked = track_frame_pair(f, f, pts, cfg);
  ASSERT_EQ(tracked.size(), pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    ASSERT_TRUE(tracked[k].has_value());
    EXPECT_LE(distance(*tracked[k], pts[k]), 0.05);
  }
}

TEST(Klt, ShiftRightTwo) {
  const auto a = textured(120, 90);
  const auto b = textured(120, 90, 2.0, 0.0);
  TrackerConfig cfg;
  std::vector<Point2> pts;
  for (const auto& p : detect_corners(a, cfg))
    if (p.x > 15 && p.x < 100 && p.y > 15 && p.y < 75) pts.push_back(p);
  ASSERT_FALSE(pts.empty());
  const auto tracked = track_frame_pair(a, b, pts, cfg);
  int ok = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!tracked[k]) continue;
    ++ok;
    EXPECT_NEAR(tracked[k]->x - pts[k].x, 2.0, 0.25);
    EXPECT_NEAR(tracked[k]->y - pts[k].y, 0.0, 0.25);
  }
  EXPECT_GT(ok, static_cast<int>(pts.size()) / 2);
}

TEST(Klt, ConstantRegionLost) {
  GrayFrame f(80, 80, 0);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) f.at(x, y) = static_cast<std::uint8_t>((x * 37 + y * 91) % 255);
  const std::vector<Point2> pts{{60, 60}};
  const auto tracked = track_frame_pair(f, f, pts, TrackerConfig{});
  EXPECT_FALSE(tracked[0].has_value());
}

TEST(Trajectories, StaticVideo) {
  const auto f = textured(100, 80);
  const std::vector<GrayFrame> frames(6, f);
  TrackerConfig cfg;
  const auto ts = build_trajectories(frames, cfg);
  ASSERT_FALSE(ts.empty());
  for (const auto& tr : ts.trajectories()) {
    EXPECT_EQ(tr.start_frame, 0);
    EXPECT_EQ(tr.length(), 6);
    for (const auto& p : tr.points) EXPECT_LE(distance(p, tr.points.front()), 0.05);
  }
}

TEST(Trajectories, TranslatingVideo) {
  std::vector<GrayFrame> frames;
  for (int t = 0; t < 6; ++t) frames.push_back(textured(120, 90, 1.5 * t, 0.5 * t));
  TrackerConfig cfg;
  const auto ts = build_trajectories(frames, cfg);
  ASSERT_FALSE(ts.empty());
  const double inset = cfg.window / 2 + 1;
  int checked = 0;
  for (const auto& tr : ts.trajectories()) {
    for (int k = 1; k < tr.length(); ++k) {
      const Point2 p = tr.points[static_cast<std::size_t>(k - 1)];
      if (p.x < inset || p.y < inset || p.x > 119 - inset - 2 || p.y > 89 - inset - 1) continue;
      ++checked;
      const Point2 d = tr.points[static_cast<std::size_t>(k)] - p;
      EXPECT_NEAR(d.x, 1.5, 0.25);
      EXPECT_NEAR(d.y, 0.5, 0.25);
    }
    for (const auto& p : tr.points) {
      EXPECT_GE(p.x, 0.0);
      EXPECT_LE(p.x, 119.0);
      EXPECT_GE(p.y, 0.0);
      EXPECT_LE(p.y, 89.0);
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Trajectories, TwoFramesFilteredOut) {
  const auto f = textured(100, 80);
  const std::vector<GrayFrame> frames(2, f);
  EXPECT_TRUE(build_trajectories(frames, TrackerConfig{}).empty());
}

TEST(Trajectories, Deterministic) {
  std::vector<GrayFrame> frames;
  for (int t = 0; t < 5; ++t) frames.push_back(textured(100, 80, std::sin(t) * 2, std::cos(t)));
  TrackerConfig cfg;
  EXPECT_EQ(build_trajectories(frames, cfg), build_trajectories(frames, cfg));
}

TEST(TrackerConfig, Validate) {
  TrackerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.window = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "meshstab/errors.hpp"
#include "meshstab/mesh.hpp"
#include "reference.hpp"

using namespace meshstab;

namespace {

std::vector<FrameFeature> random_features(std::mt19937_64& rng, int n, FrameSize size) {
  std::uniform_real_distribution<double> ux(1.0, size.width - 2.0), uy(1.0, size.height - 2.0);
  std::vector<FrameFeature> out;
  for (int i = 0; i < n; ++i) out.push_back({2 * i + 1, {ux(rng), uy(rng)}});
  return out;
}

}  // namespace

TEST(ControlPoints, SquareSpacing) {
  const auto cp = make_control_points(91, 91);
  for (int i = 0; i < 10; ++i) {
    EXPECT_DOUBLE_EQ(cp.points[static_cast<std::size_t>(i)].x, 10.0 * i);
    EXPECT_DOUBLE_EQ(cp.points[static_cast<std::size_t>(i)].y, 0.0);
  }
}

TEST(ControlPoints, UniqueWithCorners) {
  for (auto [w, h] : {std::pair{320, 240}, {91, 91}, {17, 400}}) {
    const auto cp = make_control_points(w, h);
    std::set<std::pair<double, double>> uniq;
    for (const auto& p : cp.points) {
      uniq.insert({p.x, p.y});
      EXPECT_TRUE(p.x == 0 || p.y == 0 || p.x == w - 1 || p.y == h - 1);
    }
    EXPECT_EQ(uniq.size(), 36u);
    for (auto c : {std::pair<double, double>{0, 0}, {w - 1.0, 0}, {0, h - 1.0}, {w - 1.0, h - 1.0}})
      EXPECT_TRUE(uniq.count(c));
  }
  EXPECT_THROW(make_control_points(1, 10), std::invalid_argument);
}

TEST(ControlPoints, ClockwiseOrder) {
  const auto cp = make_control_points(100, 50);
  double area2 = 0;
  for (std::size_t k = 0; k < cp.points.size(); ++k) {
    const auto& a = cp.points[k];
    const auto& b = cp.points[(k + 1) % cp.points.size()];
    area2 += cross(a, b);
  }
  // y grows down, so clockwise on screen is positive in this sum
  EXPECT_GT(area2, 0);
  EXPECT_DOUBLE_EQ(0.5 * area2, 99.0 * 49.0);
}

TEST(FrameMesh, SingleCenteredFeature) {
  const std::vector<FrameFeature> f{{3, {50, 40}}};
  const auto mesh = build_frame_mesh(f, {101, 81});
  EXPECT_TRUE(mesh.inner.empty());
  EXPECT_TRUE(mesh.feature_starved());
  EXPECT_EQ(mesh.outer.size(), mesh.triangles.size());
}

TEST(FrameMesh, ThreeFeaturesOneInner) {
  const std::vector<FrameFeature> f{{0, {40, 30}}, {1, {60, 30}}, {2, {50, 50}}};
  const auto mesh = build_frame_mesh(f, {101, 81});
  ASSERT_EQ(mesh.inner.size(), 1u);
  EXPECT_EQ(mesh.triangles[static_cast<std::size_t>(mesh.inner[0])], (TriangleIndices{0, 1, 2}));
}

TEST(FrameMesh, ClassificationBruteForce) {
  std::mt19937_64 rng(8);
  const FrameSize size{320, 240};
  const auto f = random_features(rng, 50, size);
  const auto mesh = build_frame_mesh(f, size);
  std::vector<int> inner, outer;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const bool all_features = t[0] < 50 && t[1] < 50 && t[2] < 50;
    (all_features ? inner : outer).push_back(static_cast<int>(i));
  }
  EXPECT_EQ(mesh.inner, inner);
  EXPECT_EQ(mesh.outer, outer);
}

TEST(FrameMesh, AreaTilesFrame) {
  std::mt19937_64 rng(9);
  const FrameSize size{320, 240};
  const auto mesh = build_frame_mesh(random_features(rng, 40, size), size);
  double area = 0;
  for (const auto& t : mesh.triangles)
    area += 0.5 * signed_area2(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
  EXPECT_NEAR(area, 319.0 * 239.0, 1e-6 * 319.0 * 239.0);
}

TEST(FrameMesh, DropsDuplicatesAndControlCoincidence) {
  const std::vector<FrameFeature> f{{1, {20, 20}}, {4, {20, 20 + 1e-9}}, {6, {0, 0}}, {8, {50, 30}}};
  const auto mesh = build_frame_mesh(f, {101, 81});
  ASSERT_EQ(mesh.feature_count(), 2);
  EXPECT_EQ(mesh.features[0].id, 1);
  EXPECT_EQ(mesh.features[1].id, 8);
  EXPECT_EQ(mesh.merged_ids, (std::vector<int>{4, 6}));
}

TEST(FrameMesh, NeighborsMatchAdjacency) {
  std::mt19937_64 rng(10);
  const FrameSize size{200, 150};
  const auto mesh = build_frame_mesh(random_features(rng, 25, size), size);
  std::vector<std::vector<int>> nb(mesh.triangles.size());
  for (const auto& a : mesh.adjacency) {
    nb[static_cast<std::size_t>(a.first)].push_back(a.second);
    nb[static_cast<std::size_t>(a.second)].push_back(a.first);
  }
  for (auto& v : nb) std::sort(v.begin(), v.end());
  EXPECT_EQ(mesh.neighbors, nb);
}

TEST(FrameMesh, FromTrajectories) {
  std::mt19937_64 rng(11);
  const auto ts = meshstab::testing::random_instance(rng, 6, 8, {120, 90});
  for (int t = 0; t < 8; ++t) {
    const auto mesh = build_frame_mesh(ts, t);
    EXPECT_EQ(mesh.frame, t);
    EXPECT_EQ(mesh.features, frame_feature_set(ts, t));
  }
}

TEST(FrameMesh, Deterministic) {
  std::mt19937_64 rng(12);
  const FrameSize size{320, 240};
  const auto f = random_features(rng, 60, size);
  const auto a = build_frame_mesh(f, size), b = build_frame_mesh(f, size);
  EXPECT_EQ(a.triangles, b.triangles);
  EXPECT_EQ(a.adjacency, b.adjacency);
  EXPECT_EQ(a.features, b.features);
}

TEST(FrameMesh, Dump) {
  const std::vector<FrameFeature> f{{0, {40, 30}}, {1, {60, 30}}, {2, {50, 50}}};
  const auto mesh = build_frame_mesh(f, {101, 81}, 4);
  std::ostringstream out;
  write_mesh_dump(out, mesh);
  const auto text = out.str();
  EXPECT_EQ(text.rfind("frame 4\n", 0), 0u);
  EXPECT_NE(text.find("v 0 40 30 feature 0"), std::string::npos);
  EXPECT_NE(text.find("t 0 1 2 inner"), std::string::npos);
}

TEST(Similarity, HandExample) {
  const auto c = similarity_coords({0, 1}, {0, 0}, {1, 0});
  EXPECT_DOUBLE_EQ(c.a, 0.0);
  EXPECT_DOUBLE_EQ(c.b, -1.0);
}

TEST(Similarity, Midpoint) {
  const auto c = similarity_coords({2, 3}, {1, 1}, {3, 5});
  EXPECT_DOUBLE_EQ(c.a, 0.5);
  EXPECT_DOUBLE_EQ(c.b, 0.0);
}

TEST(Similarity, RoundTripAndInvariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-100, 100), ang(-3.14, 3.14), sc(0.2, 5.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const Point2 v1{u(rng), u(rng)}, v2{u(rng), u(rng)}, v3{u(rng), u(rng)};
    if (distance(v2, v3) < 1e-3) continue;
    const auto c = similarity_coords(v1, v2, v3);
    const Point2 back = reconstruct_from_similarity(v2, v3, c);
    EXPECT_NEAR(back.x, v1.x, 1e-9);
    EXPECT_NEAR(back.y, v1.y, 1e-9);

    const double th = ang(rng), s = sc(rng);
    const Point2 shift{u(rng), u(rng)};
    const auto sim = [&](Point2 p) {
      return Point2{s * (std::cos(th) * p.x - std::sin(th) * p.y), s * (std::sin(th) * p.x + std::cos(th) * p.y)} +
             shift;
    };
    const auto c2 = similarity_coords(sim(v1), sim(v2), sim(v3));
    EXPECT_NEAR(c2.a, c.a, 1e-7 * std::max(1.0, std::abs(c.a)));
    EXPECT_NEAR(c2.b, c.b, 1e-7 * std::max(1.0, std::abs(c.b)));
  }
  EXPECT_THROW(similarity_coords({1, 1}, {2, 2}, {2, 2}), DegenerateGeometry);
}

TEST(Barycentric, Examples) {
  const auto v = barycentric({0, 0}, {0, 0}, {1, 0}, {0, 1});
  EXPECT_DOUBLE_EQ(v.a, 1.0);
  EXPECT_DOUBLE_EQ(v.b, 0.0);
  EXPECT_DOUBLE_EQ(v.c, 0.0);
  const auto c = barycentric({1, 1}, {0, 0}, {3, 0}, {0, 3});
  EXPECT_NEAR(c.a, 1.0 / 3, 1e-15);
  EXPECT_NEAR(c.b, 1.0 / 3, 1e-15);
  EXPECT_NEAR(c.c, 1.0 / 3, 1e-15);
  const auto o = barycentric({2, 0}, {0, 0}, {1, 0}, {0, 1});
  EXPECT_DOUBLE_EQ(o.a, -1.0);
  EXPECT_DOUBLE_EQ(o.b, 2.0);
  EXPECT_DOUBLE_EQ(o.c, 0.0);
  EXPECT_THROW(barycentric({0, 0}, {0, 0}, {1, 1}, {2, 2}), DegenerateGeometry);
}

TEST(Barycentric, RandomQueriesAgainstDenseSolve) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int rep = 0; rep < 1000; ++rep) {
    const Point2 p{u(rng), u(rng)}, v1{u(rng), u(rng)}, v2{u(rng), u(rng)}, v3{u(rng), u(rng)};
    if (std::abs(signed_area2(v1, v2, v3)) < 1.0) continue;
    const auto w = barycentric(p, v1, v2, v3);
    const auto r = meshstab::testing::ref_barycentric(p, v1, v2, v3);
    EXPECT_NEAR(w.a + w.b + w.c, 1.0, 1e-12);
    const Point2 q = w.a * v1 + w.b * v2 + w.c * v3;
    EXPECT_NEAR(q.x, p.x, 1e-9);
    EXPECT_NEAR(q.y, p.y, 1e-9);
    EXPECT_NEAR(w.a, r[0], 1e-8);
    EXPECT_NEAR(w.b, r[1], 1e-8);
    EXPECT_NEAR(w.c, r[2], 1e-8);
  }
}

TEST(OppositeVertex, Basic) {
  EXPECT_EQ(opposite_vertex({3, 7, 9}, {3, 9}), 7);
  EXPECT_EQ(opposite_vertex({3, 7, 9}, {7, 9}), 3);
}

#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "meshstab/errors.hpp"
#include "meshstab/scene.hpp"
#include "meshstab/trajectory.hpp"
#include "reference.hpp"

using namespace meshstab;

namespace {

FeatureTrajectory make(int id, int start, int len, double x = 5, double y = 5) {
  FeatureTrajectory tr;
  tr.id = id;
  tr.start_frame = start;
  for (int k = 0; k < len; ++k) tr.points.push_back({x + k, y});
  return tr;
}

}  // namespace

TEST(FrameFeatureSet, SingleTrajectory) {
  const TrajectorySet ts({make(0, 0, 6)}, 6, {64, 64});
  const auto m = frame_feature_set(ts, 3);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].id, 0);
  EXPECT_EQ(m[0].position, (Point2{8, 5}));
}

TEST(FrameFeatureSet, OutsideAllIntervals) {
  const TrajectorySet ts({make(0, 0, 3), make(1, 6, 2)}, 10, {64, 64});
  EXPECT_TRUE(frame_feature_set(ts, 4).empty());
  EXPECT_THROW(frame_feature_set(ts, 10), std::out_of_range);
}

TEST(FrameFeatureSet, StaggeredOverlap) {
  const TrajectorySet ts({make(4, 0, 4), make(2, 3, 4), make(9, 8, 2)}, 10, {64, 64});
  const auto m = frame_feature_set(ts, 3);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].id, 2);
  EXPECT_EQ(m[1].id, 4);
}

TEST(FrameFeatureSet, SizesSumToPointCount) {
  std::mt19937_64 rng(1);
  const auto ts = meshstab::testing::random_instance(rng, 12, 20, {100, 80});
  std::size_t sum = 0;
  for (int t = 0; t < ts.frame_count(); ++t) sum += frame_feature_set(ts, t).size();
  EXPECT_EQ(sum, ts.total_points());
}

TEST(FilterShort, Threshold) {
  const TrajectorySet ts({make(0, 0, 2), make(1, 0, 4), make(2, 0, 7)}, 10, {64, 64});
  const auto f = filter_short(ts, 3);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.trajectories()[0].length(), 4);
  EXPECT_EQ(f.trajectories()[1].length(), 7);
}

TEST(FilterShort, NoOpAndStrict) {
  const TrajectorySet four({make(0, 0, 4), make(1, 2, 4)}, 10, {64, 64});
  EXPECT_EQ(filter_short(four, 3), four);
  const TrajectorySet three({make(0, 0, 3)}, 10, {64, 64});
  EXPECT_TRUE(filter_short(three, 3).empty());
  EXPECT_THROW(filter_short(four, 0), std::invalid_argument);
}

TEST(FilterShort, Idempotent) {
  std::mt19937_64 rng(2);
  const auto ts = meshstab::testing::random_instance(rng, 15, 12, {100, 80});
  const auto once = filter_short(ts, 5);
  EXPECT_EQ(filter_short(once, 5), once);
}

TEST(TrajectorySet, RejectsInvalid) {
  EXPECT_THROW(TrajectorySet({make(0, 8, 4)}, 10, {64, 64}), std::invalid_argument);
  EXPECT_THROW(TrajectorySet({make(0, 0, 2), make(0, 3, 2)}, 10, {64, 64}), std::invalid_argument);
  EXPECT_THROW(TrajectorySet({make(0, 0, 2, 70, 5)}, 10, {64, 64}), std::invalid_argument);
  EXPECT_NO_THROW(TrajectorySet::unchecked({make(0, 0, 2, 70, 5)}, 10, {64, 64}));
}

TEST(TrajectoryIo, TwoRecords) {
  std::istringstream in("10 64 48\n1 0 1 2 3 4\n7 5 10 10 11 11 12 12\n");
  const auto ts = read_trajectories(in);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts.by_id(7).start_frame, 5);
  EXPECT_EQ(ts.by_id(7).length(), 3);
}

TEST(TrajectoryIo, RecordPastEndNamesRecord) {
  std::istringstream in("4 64 48\n1 0 1 2\n3 2 1 1 2 2 3 3\n");
  try {
    read_trajectories(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("trajectory 3"), std::string::npos);
  }
}

TEST(TrajectoryIo, EmptyListKeepsFrameCount) {
  std::istringstream in("17 64 48\n");
  const auto ts = read_trajectories(in);
  EXPECT_TRUE(ts.empty());
  EXPECT_EQ(ts.frame_count(), 17);
}

TEST(TrajectoryIo, MalformedInput) {
  for (const char* text : {"", "10 64\n", "10 64 48\n1 0 1\n", "10 64 48\n1 0 1 x\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_trajectories(in), ParseError) << text;
  }
}

TEST(TrajectoryIo, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ts = meshstab::testing::random_instance(rng, 8, 15, {123, 77}, 0.5, 4.0);
    std::stringstream buf;
    write_trajectories(buf, ts);
    EXPECT_EQ(read_trajectories(buf), ts);
  }
}

TEST(TrajectoryIo, FileErrors) {
  EXPECT_THROW(load_trajectories("/nonexistent/dir/x.traj"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "meshstab_traj_roundtrip.traj";
  std::mt19937_64 rng(4);
  const auto ts = meshstab::testing::random_instance(rng, 5, 10, {64, 64});
  save_trajectories(ts, path);
  EXPECT_EQ(load_trajectories(path), ts);
  std::filesystem::remove(path);
}

TEST(Scene, ZeroJitterIsTruth) {
  SceneSpec spec;
  spec.jitter_translation = 0;
  spec.jitter_rotation_deg = 0;
  const auto scene = synthesize_scene(spec, 5);
  EXPECT_EQ(scene.shaky, scene.truth);
}

TEST(Scene, TranslationJitterIsPerFrameConstant) {
  SceneSpec spec;
  spec.jitter_rotation_deg = 0;
  const auto scene = synthesize_scene(spec, 6);
  for (int t = 0; t < spec.frame_count; ++t) {
    const auto shaky = frame_feature_set(scene.shaky, t);
    const auto truth = frame_feature_set(scene.truth, t);
    ASSERT_EQ(shaky.size(), truth.size());
    ASSERT_FALSE(shaky.empty());
    const Point2 d0 = shaky[0].position - truth[0].position;
    EXPECT_LE(std::abs(d0.x), 3.0);
    EXPECT_LE(std::abs(d0.y), 3.0);
    for (std::size_t k = 1; k < shaky.size(); ++k) {
      const Point2 d = shaky[k].position - truth[k].position;
      EXPECT_NEAR(d.x, d0.x, 1e-9);
      EXPECT_NEAR(d.y, d0.y, 1e-9);
    }
  }
}

TEST(Scene, Deterministic) {
  SceneSpec spec;
  const auto a = synthesize_scene(spec, 42);
  const auto b = synthesize_scene(spec, 42);
  EXPECT_EQ(a.shaky, b.shaky);
  EXPECT_EQ(a.truth, b.truth);
  const auto c = synthesize_scene(spec, 43);
  EXPECT_FALSE(a.shaky == c.shaky);
}

TEST(Scene, Preconditions) {
  SceneSpec spec;
  spec.background_points = 3;
  EXPECT_THROW(synthesize_scene(spec, 1), std::invalid_argument);
  spec.background_points = 10;
  spec.frame_count = 9;
  EXPECT_THROW(synthesize_scene(spec, 1), std::invalid_argument);
}

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "meshstab/errors.hpp"
#include "meshstab/pipeline.hpp"

using namespace meshstab;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("meshstab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "meshstab");
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::map<std::string, std::string> report(const std::string& path) const {
    std::ifstream in(path);
    const auto kv = read_key_values(in);
    return {kv.begin(), kv.end()};
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, DefaultsListsMethodConstants) {
  ASSERT_EQ(run({"defaults"}), 0);
  std::istringstream in(out_.str());
  const auto kv = read_key_values(in);
  const std::map<std::string, std::string> m(kv.begin(), kv.end());
  EXPECT_EQ(m.at("alpha"), "20");
  EXPECT_EQ(m.at("beta"), "10");
  EXPECT_EQ(m.at("gamma"), "10");
  EXPECT_EQ(m.at("epsilon"), "20");
  EXPECT_EQ(m.at("sigma"), "10");
  EXPECT_EQ(m.at("lsm.tau"), "10");
  EXPECT_EQ(m.at("lsm.clamp_low"), "0.1");
  EXPECT_EQ(m.at("lsm.clamp_high"), "10");
  EXPECT_EQ(m.at("trajectory.min_length"), "3");
  EXPECT_EQ(m.at("control_points"), "36");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}), cli::kExitUsage);
  EXPECT_EQ(run({"stabilize", "--in", p("x")}), cli::kExitUsage);
}

TEST_F(Cli, MissingFileIsIoError) {
  EXPECT_EQ(run({"stabilize", "--in", p("missing.traj"), "--out", p("o.traj"), "--warp", p("o.warp")}),
            cli::kExitIo);
}

TEST_F(Cli, MalformedInputIsParseError) {
  std::ofstream(p("bad.traj")) << "10 64 48\n1 0 1\n";
  EXPECT_EQ(run({"stabilize", "--in", p("bad.traj"), "--out", p("o.traj"), "--warp", p("o.warp")}),
            cli::kExitParse);
  std::ofstream(p("bad.cfg")) << "alpha=abc\n";
  EXPECT_EQ(run({"synth", "--out", p("s")}), 0);
  EXPECT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("o.traj"), "--warp", p("o.warp"), "--config",
                 p("bad.cfg")}),
            cli::kExitParse);
}

TEST_F(Cli, UnknownConfigKeyIsUsage) {
  ASSERT_EQ(run({"synth", "--out", p("s"), "--scene", "frames=20", "--scene", "background_points=12"}), 0);
  EXPECT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("o.traj"), "--warp", p("o.warp"), "--set",
                 "nonsense=1"}),
            cli::kExitUsage);
  EXPECT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("o.traj"), "--warp", p("o.warp"), "--set",
                 "alpha=-3"}),
            cli::kExitUsage);
}

TEST_F(Cli, SolverFailureExitCode) {
  ASSERT_EQ(run({"synth", "--out", p("s"), "--scene", "frames=20", "--scene", "background_points=12"}), 0);
  EXPECT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("o.traj"), "--warp", p("o.warp"), "--set",
                 "solver.force_iterative=true", "--set", "solver.max_iterations=1", "--set",
                 "solver.tolerance=1e-14"}),
            cli::kExitSolver);
}

TEST_F(Cli, ZeroJitterNothingToFix) {
  ASSERT_EQ(run({"synth", "--out", p("s"), "--seed", "3", "--scene", "jitter_translation=0", "--scene",
                 "jitter_rotation_deg=0", "--scene", "frames=60", "--scene", "background_points=30",
                 "--scene", "path_x=0,0,0,0", "--scene", "path_y=0,0,0,0"}),
            0);
  ASSERT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("o.traj"), "--warp", p("o.warp")}), 0);
  ASSERT_EQ(run({"evaluate", "--before", p("s/shaky.traj"), "--after", p("o.traj"), "--stats", p("o.traj.stats"),
                 "--report", p("r.txt")}),
            0);
  const auto r = report(p("r.txt"));
  EXPECT_NEAR(std::stod(r.at("stability_after")) - std::stod(r.at("stability_before")), 0.0, 1e-3);
  EXPECT_EQ(r.at("stability_source"), "trajectories");
  EXPECT_EQ(r.at("ssim_before"), "nan");
  EXPECT_NE(r.at("runtime_per_frame_ms"), "nan");
  EXPECT_TRUE(fs::exists(p("r.svg")));
  EXPECT_TRUE(fs::exists(p("r.txt.manifest")));
}

TEST_F(Cli, TranslationJitterImproves) {
  ASSERT_EQ(run({"synth", "--out", p("s"), "--seed", "4", "--scene", "jitter_rotation_deg=0", "--scene", "frames=60",
                 "--scene", "background_points=30"}),
            0);
  ASSERT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("o.traj"), "--warp", p("o.warp")}), 0);
  ASSERT_EQ(run({"evaluate", "--before", p("s/shaky.traj"), "--after", p("o.traj"), "--report", p("r.txt")}), 0);
  const auto r = report(p("r.txt"));
  EXPECT_GT(std::stod(r.at("stability_after")), std::stod(r.at("stability_before")));
  EXPECT_LT(std::stod(r.at("jitter_energy_after")), std::stod(r.at("jitter_energy_before")));
  for (const char* key : {"ssim_before", "ssim_after", "flipped_triangles", "runtime_per_frame_ms"})
    EXPECT_TRUE(r.count(key)) << key;
}

TEST_F(Cli, StabilizeDeterministic) {
  ASSERT_EQ(run({"synth", "--out", p("s"), "--seed", "5", "--scene", "frames=30", "--scene", "background_points=20"}),
            0);
  ASSERT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("a.traj"), "--warp", p("a.warp")}), 0);
  ASSERT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("b.traj"), "--warp", p("b.warp")}), 0);
  EXPECT_EQ(slurp(p("a.traj")), slurp(p("b.traj")));
  EXPECT_EQ(slurp(p("a.warp")), slurp(p("b.warp")));
  const auto manifest = slurp(p("a.traj.manifest"));
  EXPECT_NE(manifest.find("alpha=20"), std::string::npos);
  EXPECT_NE(manifest.find("lsm.k=8"), std::string::npos);
}

TEST_F(Cli, SynthDeterministicAndRenders) {
  ASSERT_EQ(run({"synth", "--out", p("a"), "--seed", "6", "--scene", "frames=12", "--scene", "width=64", "--scene",
                 "height=48", "--scene", "background_points=10", "--render"}),
            0);
  ASSERT_EQ(run({"synth", "--out", p("b"), "--seed", "6", "--scene", "frames=12", "--scene", "width=64", "--scene",
                 "height=48", "--scene", "background_points=10"}),
            0);
  EXPECT_EQ(slurp(p("a/shaky.traj")), slurp(p("b/shaky.traj")));
  EXPECT_TRUE(fs::exists(p("a/shaky_frames/frame_00011.pgm")));
  EXPECT_TRUE(fs::exists(p("a/manifest.txt")));
}

TEST_F(Cli, RenderIdentityWarp) {
  ASSERT_EQ(run({"synth", "--out", p("s"), "--seed", "7", "--scene", "frames=12", "--scene", "width=64", "--scene",
                 "height=48", "--scene", "background_points=10", "--scene", "jitter_translation=0", "--scene",
                 "path_x=0,0,0,0", "--scene", "path_y=0,0,0,0", "--scene",
                 "jitter_rotation_deg=0", "--render"}),
            0);
  ASSERT_EQ(run({"stabilize", "--in", p("s/shaky.traj"), "--out", p("o.traj"), "--warp", p("o.warp")}), 0);
  ASSERT_EQ(run({"render", "--frames", p("s/shaky_frames"), "--warp", p("o.warp"), "--out", p("r")}), 0);
  for (int t = 0; t < 12; ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "/frame_%05d.pgm", t);
    const auto a = read_pgm(p("s/shaky_frames") + name), b = read_pgm(p("r") + name);
    int maxdiff = 0;
    for (std::size_t k = 0; k < a.data().size(); ++k) maxdiff = std::max(maxdiff, std::abs(a.data()[k] - b.data()[k]));
    EXPECT_LE(maxdiff, 1) << t;
  }
}

TEST(Config, SetAndRoundTrip) {
  PipelineConfig cfg;
  set_config_value(cfg, "alpha", "7.5");
  apply_override(cfg, "lsm.k=12");
  apply_override(cfg, "solver.force_iterative=true");
  EXPECT_EQ(cfg.stage1.alpha, 7.5);
  EXPECT_EQ(cfg.stage1.lsm.k, 12);
  EXPECT_TRUE(cfg.stage1.solver.force_iterative);
  EXPECT_THROW(set_config_value(cfg, "nope", "1"), std::invalid_argument);
  EXPECT_THROW(set_config_value(cfg, "alpha", "x"), ParseError);
  EXPECT_THROW(apply_override(cfg, "alpha"), std::invalid_argument);
  std::stringstream buf;
  write_config(buf, cfg);
  PipelineConfig back;
  read_config(buf, back);
  std::stringstream again;
  write_config(again, back);
  EXPECT_EQ(buf.str(), again.str());
}

TEST(Config, CommentsAndValidation) {
  std::istringstream in("# comment\n\nbeta = 3\n");
  PipelineConfig cfg;
  read_config(in, cfg);
  EXPECT_EQ(cfg.stage1.beta, 3.0);
  cfg.stage1.lsm.clamp_low = 20;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(config_keys().front(), "alpha");
}

TEST(Config, SceneSpec) {
  std::istringstream in("width=100\nframes=15\npath_x=1,2,3,4\n");
  const auto spec = read_scene_spec(in);
  EXPECT_EQ(spec.width, 100);
  EXPECT_EQ(spec.frame_count, 15);
  EXPECT_EQ(spec.path_x, (std::array<double, 4>{1, 2, 3, 4}));
  std::istringstream bad("path_x=1,2\n");
  EXPECT_THROW(read_scene_spec(bad), ParseError);
}

TEST(Report, KeyValuesAndSvg) {
  std::stringstream buf;
  write_key_values(buf, {{"a", "1"}, {"b", format_real(0.25)}});
  const auto kv = read_key_values(buf);
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[1].second, "0.25");
  EXPECT_EQ(format_real(20.0), "20");
  const TrajectorySet a({FeatureTrajectory{0, 0, {{1, 1}, {2, 2}, {3, 1}}}}, 3, {10, 10});
  std::ostringstream svg;
  write_trajectory_svg(svg, a, a);
  EXPECT_NE(svg.str().find("<svg"), std::string::npos);
  EXPECT_NE(svg.str().find("red"), std::string::npos);
  EXPECT_NE(svg.str().find("blue"), std::string::npos);
}

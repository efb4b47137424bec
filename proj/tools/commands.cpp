#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "meshstab/errors.hpp"
#include "meshstab/image.hpp"
#include "meshstab/metrics.hpp"
#include "meshstab/pipeline.hpp"
#include "meshstab/scene.hpp"
#include "meshstab/tracker.hpp"
#include "meshstab/trajectory.hpp"
#include "meshstab/warp.hpp"

namespace fs = std::filesystem;

namespace meshstab::cli {
namespace {

struct ConfigOptions {
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key=value configuration file");
    cmd->add_option("--set", overrides, "override one key, key=value (repeatable)");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = file.empty() ? PipelineConfig{} : load_config(file);
    for (const auto& o : overrides) apply_override(cfg, o);
    cfg.validate();
    return cfg;
  }
};

template <typename Fn>
void write_file(const fs::path& path, Fn fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  fn(out);
  if (!out) throw IoError("failed writing " + path.string());
}

void write_manifest(const fs::path& path, const std::string& command, const KeyValues& inputs,
                    const PipelineConfig* cfg) {
  write_file(path, [&](std::ostream& out) {
    out << "command=" << command << '\n';
    write_key_values(out, inputs);
    if (cfg) write_config(out, *cfg);
  });
}

fs::path manifest_for(const std::string& explicit_path, const fs::path& primary) {
  if (!explicit_path.empty()) return explicit_path;
  if (fs::is_directory(primary)) return primary / "manifest.txt";
  return fs::path(primary.string() + ".manifest");
}

std::string real_or_nan(const std::optional<double>& v) { return v ? format_real(*v) : "nan"; }

int cmd_defaults(std::ostream& out) {
  write_defaults(out);
  return kExitOk;
}

int cmd_track(const std::string& frames_path, const std::string& out_path, const ConfigOptions& co,
              const std::string& manifest, std::ostream& out) {
  const PipelineConfig cfg = co.resolve();
  const auto frames = read_frame_sequence(frames_path);
  const TrajectorySet ts = build_trajectories(frames, cfg.tracker);
  save_trajectories(ts, out_path);
  write_manifest(manifest_for(manifest, out_path), "track", {{"frames", frames_path}, {"out", out_path}}, &cfg);
  out << "tracked " << ts.size() << " trajectories over " << ts.frame_count() << " frames\n";
  return kExitOk;
}

struct SynthOptions {
  std::string spec;
  std::vector<std::string> scene_overrides;
  std::uint64_t seed = 1;
  std::string out_dir;
  bool render = false;
  std::string manifest;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  SceneSpec spec;
  {
    std::stringstream text;
    if (!o.spec.empty()) {
      std::ifstream in(o.spec);
      if (!in) throw IoError("cannot open scene spec " + o.spec);
      text << in.rdbuf() << '\n';
    }
    for (const auto& s : o.scene_overrides) text << s << '\n';
    spec = read_scene_spec(text);
  }
  const SyntheticScene scene = synthesize_scene(spec, o.seed);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  save_trajectories(scene.shaky, dir / "shaky.traj");
  save_trajectories(scene.truth, dir / "truth.traj");
  if (o.render) {
    write_frame_sequence(render_scene_frames(spec, scene, true), dir / "shaky_frames");
    write_frame_sequence(render_scene_frames(spec, scene, false), dir / "truth_frames");
  }
  KeyValues inputs{{"seed", std::to_string(o.seed)},
                   {"width", std::to_string(spec.width)},
                   {"height", std::to_string(spec.height)},
                   {"frames", std::to_string(spec.frame_count)},
                   {"background_points", std::to_string(spec.background_points)},
                   {"foreground_points", std::to_string(spec.foreground_points)},
                   {"jitter_translation", format_real(spec.jitter_translation)},
                   {"jitter_rotation_deg", format_real(spec.jitter_rotation_deg)},
                   {"margin", format_real(spec.margin)}};
  write_manifest(manifest_for(o.manifest, dir), "synth", inputs, nullptr);
  out << "wrote " << scene.shaky.size() << " trajectories to " << dir.string() << '\n';
  return kExitOk;
}

struct StabilizeOptions {
  std::string in;
  std::string out;
  std::string warp;
  std::string stats;
  std::string lsm_dump;
  std::string problem_dump;
  std::string mesh_dump;
  std::string manifest;
};

int cmd_stabilize(const StabilizeOptions& o, const ConfigOptions& co, std::ostream& out) {
  const PipelineConfig cfg = co.resolve();
  const TrajectorySet ts = load_trajectories(o.in);
  const StabilizationResult r = run_stabilization(ts, cfg);
  save_trajectories(r.stage1.stabilized, o.out);
  save_warp_field(r.warp, o.warp);

  const KeyValues stats{
      {"frames", std::to_string(ts.frame_count())},
      {"trajectories", std::to_string(ts.size())},
      {"unknowns", std::to_string(r.stage1.solve.x.size())},
      {"solver", r.stage1.solve.dense ? "dense" : "pcg"},
      {"solver_iterations", std::to_string(r.stage1.solve.iterations)},
      {"solver_relative_residual", format_real(r.stage1.solve.relative_residual)},
      {"flipped_triangles", std::to_string(r.warp.flipped_count())},
      {"starved_frames", std::to_string(r.starved_frames.size())},
      {"stage2_fallback_frames", std::to_string(r.fallback_frames.size())},
      {"runtime_per_frame_ms", format_real(r.runtime_per_frame_ms())},
  };
  write_file(o.stats.empty() ? fs::path(o.out + ".stats") : fs::path(o.stats),
             [&](std::ostream& s) { write_key_values(s, stats); });
  if (!o.lsm_dump.empty()) {
    const LsmTable table = cfg.stage1.adaptive_lsm ? LsmTable(ts, cfg.stage1.lsm) : LsmTable::uniform(ts);
    write_file(o.lsm_dump, [&](std::ostream& s) { table.write(s); });
  }
  if (!o.problem_dump.empty()) {
    const UnknownIndex index(ts);
    const LsmTable table = cfg.stage1.adaptive_lsm ? LsmTable(ts, cfg.stage1.lsm) : LsmTable::uniform(ts);
    const QuadraticProblem prob = assemble_stage1(ts, index, r.meshes, table, cfg.stage1);
    write_file(o.problem_dump, [&](std::ostream& s) { prob.write(s); });
  }
  if (!o.mesh_dump.empty()) {
    write_file(o.mesh_dump, [&](std::ostream& s) {
      for (const auto& m : r.meshes) write_mesh_dump(s, m);
    });
  }
  write_manifest(manifest_for(o.manifest, o.out), "stabilize", {{"in", o.in}, {"out", o.out}, {"warp", o.warp}},
                 &cfg);
  out << "stabilized " << ts.size() << " trajectories; " << r.warp.flipped_count() << " flipped triangles; "
      << format_real(r.runtime_per_frame_ms()) << " ms/frame\n";
  return kExitOk;
}

int cmd_render(const std::string& frames_path, const std::string& warp_path, const std::string& out_dir,
               bool crop_flag, const ConfigOptions& co, const std::string& manifest, std::ostream& out) {
  const PipelineConfig cfg = co.resolve();
  const bool do_crop = crop_flag || cfg.crop;
  const WarpField field = load_warp_field(warp_path);
  const auto frames = read_frame_sequence(frames_path);
  if (static_cast<int>(frames.size()) != field.frame_count)
    throw ParseError("frame count " + std::to_string(frames.size()) + " does not match warp field " +
                     std::to_string(field.frame_count));
  std::optional<Rect> rect;
  if (do_crop) rect = common_crop(field).rect;
  std::vector<GrayFrame> rendered;
  long long uncovered = 0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].width() != field.size.width || frames[t].height() != field.size.height)
      throw ParseError("frame " + std::to_string(t) + " size does not match the warp field");
    RenderStats rs;
    GrayFrame g = render(frames[t], field.frames[t], &rs);
    uncovered += rs.uncovered;
    rendered.push_back(rect ? crop(g, *rect) : std::move(g));
  }
  write_frame_sequence(rendered, out_dir);
  KeyValues inputs{{"frames", frames_path}, {"warp", warp_path}, {"out", out_dir}, {"crop", do_crop ? "true" : "false"}};
  if (rect)
    inputs.emplace_back("crop_rect", format_real(rect->x0) + "," + format_real(rect->y0) + "," +
                                         format_real(rect->x1) + "," + format_real(rect->y1));
  inputs.emplace_back("uncovered_pixels", std::to_string(uncovered));
  write_manifest(manifest_for(manifest, out_dir), "render", inputs, &cfg);
  out << "rendered " << rendered.size() << " frames (" << uncovered << " uncovered pixels)\n";
  return kExitOk;
}

struct EvaluateOptions {
  std::string before;
  std::string after;
  std::string before_frames;
  std::string after_frames;
  std::string stats;
  std::string report;
  std::string plot;
  std::string manifest;
};

int cmd_evaluate(const EvaluateOptions& o, const ConfigOptions& co, std::ostream& out) {
  const PipelineConfig cfg = co.resolve();
  const TrajectorySet before = load_trajectories(o.before);
  const TrajectorySet after = load_trajectories(o.after, false);
  const bool have_frames = !o.before_frames.empty() && !o.after_frames.empty();
  if (!o.before_frames.empty() != !o.after_frames.empty())
    throw std::invalid_argument("--before-frames and --after-frames must be given together");

  std::optional<double> ssim_before, ssim_after;
  StabilityReport sb, sa;
  if (have_frames) {
    const auto fb = read_frame_sequence(o.before_frames);
    const auto fa = read_frame_sequence(o.after_frames);
    ssim_before = video_ssim(fb).mean;
    ssim_after = video_ssim(fa).mean;
    sb = stability_score(build_trajectories(fb, cfg.tracker));
    sa = stability_score(build_trajectories(fa, cfg.tracker));
  } else {
    sb = stability_score(before);
    sa = stability_score(after);
  }

  std::string flipped = "nan", runtime = "nan";
  if (!o.stats.empty()) {
    std::ifstream in(o.stats);
    if (!in) throw IoError("cannot open " + o.stats);
    for (const auto& [k, v] : read_key_values(in)) {
      if (k == "flipped_triangles") flipped = v;
      if (k == "runtime_per_frame_ms") runtime = v;
    }
  }

  const auto mean_or_nan = [](const StabilityReport& r) { return r.defined ? format_real(r.mean) : "nan"; };
  const KeyValues report{
      {"stability_before", mean_or_nan(sb)},
      {"stability_after", mean_or_nan(sa)},
      {"stability_source", have_frames ? "retracked" : "trajectories"},
      {"stability_segments_before", std::to_string(sb.segment_count())},
      {"stability_segments_after", std::to_string(sa.segment_count())},
      {"ssim_before", real_or_nan(ssim_before)},
      {"ssim_after", real_or_nan(ssim_after)},
      {"jitter_energy_before", format_real(residual_jitter_energy(before))},
      {"jitter_energy_after", format_real(residual_jitter_energy(after))},
      {"flipped_triangles", flipped},
      {"runtime_per_frame_ms", runtime},
  };
  write_file(o.report, [&](std::ostream& s) { write_key_values(s, report); });
  const fs::path plot = o.plot.empty() ? fs::path(o.report).replace_extension(".svg") : fs::path(o.plot);
  write_file(plot, [&](std::ostream& s) { write_trajectory_svg(s, before, after); });
  write_manifest(manifest_for(o.manifest, o.report), "evaluate",
                 {{"before", o.before}, {"after", o.after}, {"before_frames", o.before_frames},
                  {"after_frames", o.after_frames}},
                 &cfg);
  write_key_values(out, report);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mesh-based video stabilization"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  int result = kExitOk;

  auto* defaults = app.add_subcommand("defaults", "print every configuration key with its default value");
  defaults->callback([&] { result = cmd_defaults(out); });

  std::string frames_path, out_path, manifest;
  ConfigOptions track_cfg;
  auto* track = app.add_subcommand("track", "detect and track features into a trajectory file");
  track->add_option("--frames", frames_path, "PGM directory or .y4m file")->required();
  track->add_option("--out", out_path, "output trajectory file")->required();
  track->add_option("--manifest", manifest, "manifest path");
  track_cfg.attach(track);
  track->callback([&] { result = cmd_track(frames_path, out_path, track_cfg, manifest, out); });

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "generate a synthetic shaky scene with ground truth");
  synth->add_option("--spec", synth_opt.spec, "scene spec file (key=value)");
  synth->add_option("--scene", synth_opt.scene_overrides, "override one scene key, key=value (repeatable)");
  synth->add_option("--seed", synth_opt.seed, "random seed");
  synth->add_option("--out", synth_opt.out_dir, "output directory")->required();
  synth->add_flag("--render", synth_opt.render, "also render shaky and ground-truth frames");
  synth->add_option("--manifest", synth_opt.manifest, "manifest path");
  synth->callback([&] { result = cmd_synth(synth_opt, out); });

  StabilizeOptions stab_opt;
  ConfigOptions stab_cfg;
  auto* stab = app.add_subcommand("stabilize", "solve for stabilized trajectories and the warp field");
  stab->add_option("--in", stab_opt.in, "input trajectory file")->required();
  stab->add_option("--out", stab_opt.out, "stabilized trajectory file")->required();
  stab->add_option("--warp", stab_opt.warp, "warp field file")->required();
  stab->add_option("--stats", stab_opt.stats, "run statistics (default: <out>.stats)");
  stab->add_option("--lsm-dump", stab_opt.lsm_dump, "write the LSM weight table");
  stab->add_option("--problem-dump", stab_opt.problem_dump, "write the stage-1 normal system");
  stab->add_option("--mesh-dump", stab_opt.mesh_dump, "write every frame mesh");
  stab->add_option("--manifest", stab_opt.manifest, "manifest path");
  stab_cfg.attach(stab);
  stab->callback([&] { result = cmd_stabilize(stab_opt, stab_cfg, out); });

  std::string render_frames, render_warp, render_out, render_manifest;
  bool render_crop = false;
  ConfigOptions render_cfg;
  auto* rend = app.add_subcommand("render", "warp input frames with a warp field");
  rend->add_option("--frames", render_frames, "PGM directory or .y4m file")->required();
  rend->add_option("--warp", render_warp, "warp field file")->required();
  rend->add_option("--out", render_out, "output directory")->required();
  rend->add_flag("--crop", render_crop, "crop to the common valid region");
  rend->add_option("--manifest", render_manifest, "manifest path");
  render_cfg.attach(rend);
  rend->callback([&] {
    result = cmd_render(render_frames, render_warp, render_out, render_crop, render_cfg, render_manifest, out);
  });

  EvaluateOptions eval_opt;
  ConfigOptions eval_cfg;
  auto* eval = app.add_subcommand("evaluate", "stability score and SSIM before and after");
  eval->add_option("--before", eval_opt.before, "original trajectory file")->required();
  eval->add_option("--after", eval_opt.after, "stabilized trajectory file")->required();
  eval->add_option("--before-frames", eval_opt.before_frames, "original frames (enables SSIM and re-tracking)");
  eval->add_option("--after-frames", eval_opt.after_frames, "rendered frames");
  eval->add_option("--stats", eval_opt.stats, "statistics written by stabilize");
  eval->add_option("--report", eval_opt.report, "report file (key=value)")->required();
  eval->add_option("--plot", eval_opt.plot, "SVG trajectory plot (default: report path with .svg)");
  eval->add_option("--manifest", eval_opt.manifest, "manifest path");
  eval_cfg.attach(eval);
  eval->callback([&] { result = cmd_evaluate(eval_opt, eval_cfg, out); });

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const DegenerateGeometry& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return result;
}

}  // namespace meshstab::cli

#include "meshstab/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <variant>

#include "meshstab/errors.hpp"

namespace meshstab {
namespace {

using Slot = std::variant<int*, double*, bool*>;

struct Entry {
  const char* key;
  Slot slot;
};

std::vector<Entry> entries(PipelineConfig& c) {
  auto& tr = c.tracker;
  auto& s1 = c.stage1;
  return {
      {"alpha", &s1.alpha},
      {"beta", &s1.beta},
      {"gamma", &s1.gamma},
      {"epsilon", &s1.epsilon},
      {"regularization", &s1.regularization},
      {"sigma", &s1.temporal.sigma},
      {"lsm.k", &s1.lsm.k},
      {"lsm.tau", &s1.lsm.tau},
      {"lsm.clamp_low", &s1.lsm.clamp_low},
      {"lsm.clamp_high", &s1.lsm.clamp_high},
      {"adaptive.temporal", &s1.adaptive_temporal},
      {"adaptive.lsm", &s1.adaptive_lsm},
      {"solver.tolerance", &s1.solver.tolerance},
      {"solver.max_iterations", &s1.solver.max_iterations},
      {"solver.dense_threshold", &s1.solver.dense_threshold},
      {"solver.force_iterative", &s1.solver.force_iterative},
      {"stage2.singular_ratio", &c.stage2_singular_ratio},
      {"trajectory.min_length", &tr.min_trajectory_length},
      {"tracker.grid_rows", &tr.grid_rows},
      {"tracker.grid_cols", &tr.grid_cols},
      {"tracker.corners", &tr.global_corner_target},
      {"tracker.min_per_cell", &tr.min_per_cell},
      {"tracker.redetect_fraction", &tr.redetect_fraction},
      {"tracker.pyramid_levels", &tr.pyramid_levels},
      {"tracker.window", &tr.window},
      {"tracker.fb_error_max", &tr.fb_error_max},
      {"tracker.quality_level", &tr.quality_level},
      {"tracker.cell_relaxation", &tr.cell_relaxation},
      {"tracker.block_size", &tr.block_size},
      {"tracker.min_distance", &tr.min_distance},
      {"tracker.max_iterations", &tr.max_iterations},
      {"tracker.convergence_eps", &tr.convergence_eps},
      {"tracker.min_eigen", &tr.min_eigen_threshold},
      {"render.crop", &c.crop},
  };
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& text, const std::string& key) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError("invalid value '" + text + "' for " + key);
  return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw ParseError("invalid boolean '" + text + "' for " + key);
}

// Calls fn(key, value, line) for every assignment line.
template <typename Fn>
void for_each_assignment(std::istream& in, Fn fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", lineno);
    try {
      fn(key, value);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
}

}  // namespace

void PipelineConfig::validate() const {
  tracker.validate();
  stage1.validate();
  if (!(stage2_singular_ratio > 0.0 && stage2_singular_ratio < 1.0))
    throw std::invalid_argument("stage2.singular_ratio must lie in (0, 1)");
}

std::vector<std::string> config_keys() {
  PipelineConfig c;
  std::vector<std::string> out;
  for (const auto& e : entries(c)) out.emplace_back(e.key);
  return out;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : entries(cfg)) {
    if (key != e.key) continue;
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, bool>)
            *p = parse_bool(value, key);
          else
            *p = parse_value<T>(value, key);
        },
        e.slot);
    return;
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

void apply_override(PipelineConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("override must be key=value: '" + assignment + "'");
  set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void read_config(std::istream& in, PipelineConfig& cfg) {
  for_each_assignment(in, [&](const std::string& k, const std::string& v) { set_config_value(cfg, k, v); });
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  PipelineConfig cfg;
  read_config(in, cfg);
  return cfg;
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_config(std::ostream& out, const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  for (const auto& e : entries(copy)) {
    out << e.key << '=';
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, bool>)
            out << (*p ? "true" : "false");
          else if constexpr (std::is_same_v<T, int>)
            out << *p;
          else
            out << format_real(*p);
        },
        e.slot);
    out << '\n';
  }
}

void write_defaults(std::ostream& out) {
  write_config(out, PipelineConfig{});
  out << "# fixed\n";
  out << "control_points=" << kControlPointCount << '\n';
  out << "control_points_per_edge=" << kControlPointsPerEdge << '\n';
  out << "stability.segment_length=" << kStabilitySegmentLength << '\n';
}

SceneSpec read_scene_spec(std::istream& in) {
  SceneSpec spec;
  const auto coeffs = [](const std::string& text, const std::string& key) {
    std::array<double, 4> c{};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
      const auto comma = text.find(',', pos);
      const bool last = i == 3;
      if (last != (comma == std::string::npos)) throw ParseError(key + " needs four comma-separated values");
      c[static_cast<std::size_t>(i)] = parse_value<double>(trim(text.substr(pos, comma - pos)), key);
      pos = comma + 1;
    }
    return c;
  };
  for_each_assignment(in, [&](const std::string& k, const std::string& v) {
    if (k == "width") spec.width = parse_value<int>(v, k);
    else if (k == "height") spec.height = parse_value<int>(v, k);
    else if (k == "frames") spec.frame_count = parse_value<int>(v, k);
    else if (k == "background_points") spec.background_points = parse_value<int>(v, k);
    else if (k == "foreground_points") spec.foreground_points = parse_value<int>(v, k);
    else if (k == "jitter_translation") spec.jitter_translation = parse_value<double>(v, k);
    else if (k == "jitter_rotation_deg") spec.jitter_rotation_deg = parse_value<double>(v, k);
    else if (k == "path_x") spec.path_x = coeffs(v, k);
    else if (k == "path_y") spec.path_y = coeffs(v, k);
    else if (k == "foreground_amplitude") spec.foreground_amplitude = parse_value<double>(v, k);
    else if (k == "foreground_period") spec.foreground_period = parse_value<double>(v, k);
    else if (k == "margin") spec.margin = parse_value<double>(v, k);
    else throw std::invalid_argument("unknown scene key '" + k + "'");
  });
  return spec;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene spec " + path.string());
  return read_scene_spec(in);
}

std::vector<FrameMesh> build_meshes(const TrajectorySet& ts) {
  std::vector<FrameMesh> meshes;
  meshes.reserve(static_cast<std::size_t>(ts.frame_count()));
  for (int t = 0; t < ts.frame_count(); ++t) meshes.push_back(build_frame_mesh(ts, t));
  return meshes;
}

StabilizationResult run_stabilization(const TrajectorySet& ts, const PipelineConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  StabilizationResult r;
  r.meshes = build_meshes(ts);
  for (const auto& m : r.meshes)
    if (m.feature_starved()) r.starved_frames.push_back(m.frame);
  r.stage1 = stabilize_stage1(ts, r.meshes, cfg.stage1);
  r.controls = solve_stage2(r.meshes, r.stage1.stabilized, cfg.stage2());
  for (std::size_t t = 0; t < r.controls.size(); ++t)
    if (r.controls[t].fallback) r.fallback_frames.push_back(static_cast<int>(t));
  r.warp = build_warp_field(r.meshes, r.stage1.stabilized, r.controls);
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

KeyValues read_key_values(std::istream& in) {
  KeyValues kv;
  for_each_assignment(in, [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); });
  return kv;
}

void write_trajectory_svg(std::ostream& out, const TrajectorySet& original, const TrajectorySet& stabilized,
                          int max_tracks) {
  const FrameSize size = original.frame_size();
  std::vector<const FeatureTrajectory*> picks;
  for (const auto& tr : original.trajectories())
    if (stabilized.index_of(tr.id)) picks.push_back(&tr);
  std::stable_sort(picks.begin(), picks.end(),
                   [](const FeatureTrajectory* a, const FeatureTrajectory* b) { return a->length() > b->length(); });
  if (static_cast<int>(picks.size()) > max_tracks) picks.resize(static_cast<std::size_t>(max_tracks));

  char buf[64];
  const auto path = [&](const FeatureTrajectory& tr, const char* colour, const char* extra) {
    out << "  <polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"0.8\"" << extra << " points=\"";
    for (const Point2& p : tr.points) {
      std::snprintf(buf, sizeof buf, "%.3f,%.3f ", p.x, p.y);
      out << buf;
    }
    out << "\"/>\n";
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << size.width << ' ' << size.height
      << "\" width=\"" << 2 * size.width << "\" height=\"" << 2 * size.height << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << size.width << "\" height=\"" << size.height
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  for (const auto* tr : picks) path(*tr, "red", " stroke-dasharray=\"2,1\"");
  for (const auto* tr : picks) path(stabilized.by_id(tr->id), "blue", "");
  out << "</svg>\n";
}

}  // namespace meshstab

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meshstab/mesh.hpp"
#include "meshstab/metrics.hpp"
#include "meshstab/scene.hpp"
#include "meshstab/stage1.hpp"
#include "meshstab/stage2.hpp"
#include "meshstab/tracker.hpp"
#include "meshstab/warp.hpp"

namespace meshstab {

struct PipelineConfig {
  TrackerConfig tracker;
  StageOneConfig stage1;
  double stage2_singular_ratio = 1e-12;
  bool crop = false;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  StageTwoConfig stage2() const { return {stage1.gamma, stage1.epsilon, stage2_singular_ratio}; }
};

/// Config keys in output order.
std::vector<std::string> config_keys();

/// Sets one key from its text value. Throws std::invalid_argument for an
/// unknown key and ParseError for a malformed value.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);
/// "key=value" form of set_config_value.
void apply_override(PipelineConfig& cfg, const std::string& assignment);

/// Flat `key=value` lines; blank lines and `#` comments are skipped.
void read_config(std::istream& in, PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, one `key=value` per line.
void write_config(std::ostream& out, const PipelineConfig& cfg);

/// write_config of the defaults plus the fixed structural constants.
void write_defaults(std::ostream& out);

/// Scene description in the same key=value form. Keys: width, height,
/// frames, background_points, foreground_points, jitter_translation,
/// jitter_rotation_deg, path_x, path_y (four comma-separated coefficients),
/// foreground_amplitude, foreground_period, margin.
SceneSpec read_scene_spec(std::istream& in);
SceneSpec load_scene_spec(const std::filesystem::path& path);

struct StabilizationResult {
  std::vector<FrameMesh> meshes;
  StageOneResult stage1;
  std::vector<FrameControls> controls;
  WarpField warp;
  /// Frames without inner triangles.
  std::vector<int> starved_frames;
  /// Frames whose stage-2 system was singular.
  std::vector<int> fallback_frames;
  double runtime_ms = 0.0;

  double runtime_per_frame_ms() const {
    return meshes.empty() ? 0.0 : runtime_ms / static_cast<double>(meshes.size());
  }
};

std::vector<FrameMesh> build_meshes(const TrajectorySet& ts);

/// Meshes every frame, solves both stages and builds the warp field.
StabilizationResult run_stabilization(const TrajectorySet& ts, const PipelineConfig& cfg);

/// Ordered key=value report.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string format_real(double v);
void write_key_values(std::ostream& out, const KeyValues& kv);
KeyValues read_key_values(std::istream& in);

/// Sample trajectory paths in the image plane: originals red, stabilized
/// blue. Up to `max_tracks` of the longest trajectories present in both.
void write_trajectory_svg(std::ostream& out, const TrajectorySet& original, const TrajectorySet& stabilized,
                          int max_tracks = 12);

}  // namespace meshstab

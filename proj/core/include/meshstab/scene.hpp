#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshstab/geometry.hpp"
#include "meshstab/image.hpp"
#include "meshstab/trajectory.hpp"

namespace meshstab {

/// Description of a synthetic shaky clip with known ground truth.
///
/// The smooth camera path is a cubic polynomial per axis in normalized time
/// u = t / (T - 1): offset(u) = c0 + c1 u + c2 u^2 + c3 u^3 pixels. Each frame
/// then receives an i.i.d. similarity jitter about the frame center: a
/// translation drawn uniformly from [-jitter_translation, jitter_translation]
/// per axis and a rotation drawn uniformly from [-jitter_rotation_deg,
/// jitter_rotation_deg].
struct SceneSpec {
  int width = 320;
  int height = 240;
  int frame_count = 120;
  int background_points = 60;
  int foreground_points = 0;
  double jitter_translation = 3.0;
  double jitter_rotation_deg = 0.5;
  std::array<double, 4> path_x{0.0, 20.0, -10.0, 5.0};
  std::array<double, 4> path_y{0.0, 10.0, 5.0, -5.0};
  /// Foreground points ride on an extra sinusoidal motion of this amplitude.
  double foreground_amplitude = 15.0;
  double foreground_period = 60.0;
  /// Minimum distance kept between any trajectory point and the frame border.
  double margin = 12.0;
  /// Optional explicit frame-0 ground-truth positions. When non-empty they
  /// replace random sampling; the last `foreground_points` entries are
  /// foreground.
  std::vector<Point2> points;
};

/// Per-frame similarity jitter: shaky = c + R(angle) (truth - c) + shift.
struct FrameJitter {
  double angle = 0.0;  // radians
  Point2 shift;
};

struct SyntheticScene {
  TrajectorySet shaky;
  TrajectorySet truth;
  std::vector<FrameJitter> jitter;
  std::vector<Point2> camera_offset;
  std::vector<bool> foreground;  // indexed by trajectory id
  std::uint64_t texture_seed = 0;
};

/// Applies a frame's jitter to a ground-truth position.
Point2 apply_jitter(const FrameJitter& j, Point2 center, Point2 truth);

/// Deterministic for a given (spec, seed). Throws std::invalid_argument for
/// fewer than 4 points, fewer than 10 frames, or collinear explicit points.
SyntheticScene synthesize_scene(const SceneSpec& spec, std::uint64_t seed);

/// Procedural texture value in [0, 255] at a continuous world position.
double scene_texture(std::uint64_t seed, Point2 world);

/// Renders the background texture as seen through the jittered camera at
/// every frame. Frame t shows the world translated by the camera offset and
/// then warped by that frame's jitter.
std::vector<GrayFrame> render_scene_frames(const SceneSpec& spec, const SyntheticScene& scene,
                                           bool apply_jitter = true);

}  // namespace meshstab

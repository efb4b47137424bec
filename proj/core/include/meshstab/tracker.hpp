#pragma once

#include <optional>
#include <span>
#include <vector>

#include "meshstab/geometry.hpp"
#include "meshstab/image.hpp"
#include "meshstab/trajectory.hpp"

namespace meshstab {

struct TrackerConfig {
  int grid_rows = 10;
  int grid_cols = 10;
  int global_corner_target = 200;
  int min_per_cell = 1;
  /// Re-detect once fewer than redetect_fraction * global_corner_target
  /// points are still tracked.
  double redetect_fraction = 0.6;
  int pyramid_levels = 3;
  int window = 21;
  double fb_error_max = 1.0;

  double quality_level = 0.01;
  double cell_relaxation = 0.1;
  int block_size = 7;
  double min_distance = 8.0;
  int max_iterations = 30;
  double convergence_eps = 0.01;
  /// Minimum eigenvalue of the normalized window gradient matrix below
  /// which a point is declared untrackable.
  double min_eigen_threshold = 1e-4;
  int min_trajectory_length = 3;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct Corner {
  Point2 position;
  double score = 0.0;
};

/// Minimum-eigenvalue corner response of the block_size x block_size gradient
/// structure tensor, one value per pixel (zero where the block does not fit).
std::vector<double> corner_response(const GrayFrame& frame, int block_size);

/// Gridded Shi-Tomasi detection. Up to global_corner_target corners above
/// quality_level * max response, then each grid cell short of min_per_cell
/// corners is filled by repeatedly relaxing its threshold. Result is sorted
/// by descending score, then row-major position.
std::vector<Corner> detect_scored_corners(const GrayFrame& frame, const TrackerConfig& cfg);
std::vector<Point2> detect_corners(const GrayFrame& frame, const TrackerConfig& cfg);

/// Pyramidal Lucas-Kanade with a forward-backward consistency check.
/// std::nullopt marks a lost point.
std::vector<std::optional<Point2>> track_frame_pair(const GrayFrame& prev, const GrayFrame& next,
                                                    std::span<const Point2> points, const TrackerConfig& cfg);

/// Detects, tracks and re-detects through the whole sequence and returns the
/// trajectories longer than cfg.min_trajectory_length frames.
TrajectorySet build_trajectories(std::span<const GrayFrame> frames, const TrackerConfig& cfg);

}  // namespace meshstab

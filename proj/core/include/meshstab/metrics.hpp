#pragma once

#include <span>
#include <vector>

#include "meshstab/image.hpp"
#include "meshstab/trajectory.hpp"

namespace meshstab {

inline constexpr int kStabilitySegmentLength = 40;

struct StabilityReport {
  std::vector<double> segment_scores;
  double mean = 0.0;
  /// False when no trajectory is long enough for a single segment.
  bool defined = false;

  std::size_t segment_count() const noexcept { return segment_scores.size(); }
};

/// Chord length over path length of a point sequence; 1 for zero path.
double segment_stability(std::span<const Point2> points);

/// Per trajectory, consecutive disjoint 40-frame segments from its start;
/// shorter leftovers are ignored.
StabilityReport stability_score(const TrajectorySet& ts);

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, L = 255, over all window positions fully inside the frame.
double ssim_pair(const GrayFrame& a, const GrayFrame& b);

struct SsimReport {
  std::vector<double> pair_values;
  double mean = 0.0;
};

/// SSIM of every adjacent frame pair and their mean.
SsimReport video_ssim(std::span<const GrayFrame> frames);

/// Sum over trajectories and interior frames of ||p[t+1] - 2 p[t] + p[t-1]||^2.
double residual_jitter_energy(const TrajectorySet& ts);

}  // namespace meshstab

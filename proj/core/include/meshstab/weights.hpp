#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "meshstab/trajectory.hpp"

namespace meshstab {

struct TemporalWeightParams {
  double sigma = 10.0;
};

struct LsmParams {
  int k = 8;
  double tau = 10.0;
  double clamp_low = 0.1;
  double clamp_high = 10.0;

  void validate() const;
};

/// exp(-((d - sigma) / sigma)^3).
double temporal_weight(double d, double sigma);

/// Trajectory id `i` followed by its k nearest neighbours in `features`
/// (ascending distance, ties by ascending id). k shrinks to the number of
/// other points available. Throws std::invalid_argument if `i` is absent.
std::vector<int> knn_neighbors(std::span<const FrameFeature> features, int i, int k);

struct HomographyFit {
  /// h11 h12 h13 h21 h22 h23 h31 h32; h33 = 1.
  std::array<double, 8> h{};
  /// Squared norm of the least-squares residual of the stacked system.
  double residual = 0.0;
  bool degenerate = false;
};

/// Least-squares fit of the 8-parameter homography taking `current[j]` to
/// `previous[j]`, linearised as in the standard DLT with h33 fixed to 1.
HomographyFit fit_local_homography(std::span<const Point2> current, std::span<const Point2> previous);

/// Foreground weight of trajectory `id` at frame t, clamped to
/// [clamp_low, clamp_high]. Neighbours are drawn from the trajectories alive
/// at both t and t-1. Returns 1.0 at the trajectory's first frame, when fewer
/// than 4 neighbours exist, or when the fit is degenerate.
double lsm_weight(const TrajectorySet& ts, int t, int id, const LsmParams& params);

/// LSM weights for every stored (frame, trajectory) point.
class LsmTable {
 public:
  LsmTable() = default;
  LsmTable(const TrajectorySet& ts, const LsmParams& params);

  /// Neutral table: every lookup returns 1.
  static LsmTable uniform(const TrajectorySet& ts);

  double at(int t, int id) const;
  std::size_t size() const noexcept;

  /// Lines `t id weight`, frames ascending, ids ascending within a frame.
  void write(std::ostream& out) const;

 private:
  int frame_count_ = 0;
  std::vector<int> ids_;
  std::vector<int> starts_;
  std::unordered_map<int, std::size_t> index_;
  std::vector<std::vector<double>> weights_;  // per trajectory, per point
};

}  // namespace meshstab

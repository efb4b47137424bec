#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "meshstab/geometry.hpp"

namespace meshstab {

/// One tracked point over a contiguous, gap-free frame interval
/// [start_frame, end_frame()]. Frame indices are 0-based.
struct FeatureTrajectory {
  int id = 0;
  int start_frame = 0;
  std::vector<Point2> points;

  int length() const noexcept { return static_cast<int>(points.size()); }
  int end_frame() const noexcept { return start_frame + length() - 1; }
  bool alive_at(int t) const noexcept { return t >= start_frame && t <= end_frame(); }
  const Point2& at(int t) const { return points[static_cast<std::size_t>(t - start_frame)]; }

  friend bool operator==(const FeatureTrajectory&, const FeatureTrajectory&) = default;
};

struct FrameSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const FrameSize&, const FrameSize&) = default;
};

/// A trajectory position at one frame.
struct FrameFeature {
  int id = 0;
  Point2 position;
  friend bool operator==(const FrameFeature&, const FrameFeature&) = default;
};

/// Immutable collection of trajectories over a T-frame clip of size W x H.
///
/// Trajectories are kept sorted by id. The checked constructor enforces that
/// every point lies inside [0, W-1] x [0, H-1]; `unchecked` only enforces the
/// interval and finiteness invariants and is used for stabilized output,
/// which may legitimately leave the frame.
class TrajectorySet {
 public:
  TrajectorySet() = default;
  TrajectorySet(std::vector<FeatureTrajectory> trajectories, int frame_count, FrameSize size);

  static TrajectorySet unchecked(std::vector<FeatureTrajectory> trajectories, int frame_count, FrameSize size);

  int frame_count() const noexcept { return frame_count_; }
  FrameSize frame_size() const noexcept { return size_; }
  std::span<const FeatureTrajectory> trajectories() const noexcept { return trajectories_; }
  std::size_t size() const noexcept { return trajectories_.size(); }
  bool empty() const noexcept { return trajectories_.empty(); }
  bool bounds_checked() const noexcept { return bounds_checked_; }

  /// Position in `trajectories()` of the given id, if present.
  std::optional<std::size_t> index_of(int id) const;
  const FeatureTrajectory& by_id(int id) const;

  /// Indices into `trajectories()` of those alive at frame t, ascending id.
  std::span<const std::size_t> alive_at(int t) const;

  std::size_t total_points() const noexcept;

  friend bool operator==(const TrajectorySet& a, const TrajectorySet& b) {
    return a.frame_count_ == b.frame_count_ && a.size_ == b.size_ && a.trajectories_ == b.trajectories_;
  }

 private:
  TrajectorySet(std::vector<FeatureTrajectory> trajectories, int frame_count, FrameSize size, bool check_bounds);

  std::vector<FeatureTrajectory> trajectories_;
  int frame_count_ = 0;
  FrameSize size_;
  bool bounds_checked_ = true;
  std::unordered_map<int, std::size_t> id_index_;
  std::vector<std::vector<std::size_t>> per_frame_;
};

/// The set M_t: positions of every trajectory alive at frame t, ascending id.
/// Throws std::out_of_range unless 0 <= t < T.
std::vector<FrameFeature> frame_feature_set(const TrajectorySet& ts, int t);

/// Keeps trajectories strictly longer than `min_len` frames.
TrajectorySet filter_short(const TrajectorySet& ts, int min_len);

/// Text format: header `T W H`, then one line per trajectory
/// `id s x0 y0 x1 y1 ...`. Reals are written with 17 significant digits so
/// that a load/save cycle is bit-exact.
void write_trajectories(std::ostream& out, const TrajectorySet& ts);
TrajectorySet read_trajectories(std::istream& in, bool check_bounds = true);

void save_trajectories(const TrajectorySet& ts, const std::filesystem::path& path);
TrajectorySet load_trajectories(const std::filesystem::path& path, bool check_bounds = true);

}  // namespace meshstab

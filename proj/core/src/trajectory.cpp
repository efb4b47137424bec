#include "meshstab/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "meshstab/errors.hpp"

namespace meshstab {

TrajectorySet::TrajectorySet(std::vector<FeatureTrajectory> trajectories, int frame_count, FrameSize size)
    : TrajectorySet(std::move(trajectories), frame_count, size, true) {}

TrajectorySet TrajectorySet::unchecked(std::vector<FeatureTrajectory> trajectories, int frame_count,
                                       FrameSize size) {
  return TrajectorySet(std::move(trajectories), frame_count, size, false);
}

TrajectorySet::TrajectorySet(std::vector<FeatureTrajectory> trajectories, int frame_count, FrameSize size,
                             bool check_bounds)
    : trajectories_(std::move(trajectories)), frame_count_(frame_count), size_(size),
      bounds_checked_(check_bounds) {
  if (frame_count < 0) throw std::invalid_argument("frame count must be non-negative");
  if (size.width < 1 || size.height < 1) throw std::invalid_argument("frame size must be positive");
  std::sort(trajectories_.begin(), trajectories_.end(),
            [](const FeatureTrajectory& a, const FeatureTrajectory& b) { return a.id < b.id; });

  const double xmax = size.width - 1;
  const double ymax = size.height - 1;
  per_frame_.assign(static_cast<std::size_t>(frame_count), {});
  for (std::size_t k = 0; k < trajectories_.size(); ++k) {
    const auto& tr = trajectories_[k];
    const std::string name = "trajectory " + std::to_string(tr.id);
    if (tr.points.empty()) throw std::invalid_argument(name + ": no points");
    if (tr.start_frame < 0 || tr.end_frame() >= frame_count)
      throw std::invalid_argument(name + ": frames [" + std::to_string(tr.start_frame) + ", " +
                                  std::to_string(tr.end_frame()) + "] outside [0, " +
                                  std::to_string(frame_count - 1) + "]");
    if (!id_index_.emplace(tr.id, k).second) throw std::invalid_argument(name + ": duplicate id");
    for (const auto& p : tr.points) {
      if (!is_finite(p)) throw std::invalid_argument(name + ": non-finite coordinate");
      if (check_bounds && (p.x < 0.0 || p.y < 0.0 || p.x > xmax || p.y > ymax))
        throw std::invalid_argument(name + ": point outside the frame");
    }
    for (int t = tr.start_frame; t <= tr.end_frame(); ++t) per_frame_[static_cast<std::size_t>(t)].push_back(k);
  }
}

std::optional<std::size_t> TrajectorySet::index_of(int id) const {
  const auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

const FeatureTrajectory& TrajectorySet::by_id(int id) const {
  const auto idx = index_of(id);
  if (!idx) throw std::out_of_range("no trajectory with id " + std::to_string(id));
  return trajectories_[*idx];
}

std::span<const std::size_t> TrajectorySet::alive_at(int t) const {
  if (t < 0 || t >= frame_count_) throw std::out_of_range("frame " + std::to_string(t) + " out of range");
  return per_frame_[static_cast<std::size_t>(t)];
}

std::size_t TrajectorySet::total_points() const noexcept {
  std::size_t n = 0;
  for (const auto& tr : trajectories_) n += tr.points.size();
  return n;
}

std::vector<FrameFeature> frame_feature_set(const TrajectorySet& ts, int t) {
  const auto alive = ts.alive_at(t);
  std::vector<FrameFeature> out;
  out.reserve(alive.size());
  for (std::size_t k : alive) {
    const auto& tr = ts.trajectories()[k];
    out.push_back({tr.id, tr.at(t)});
  }
  return out;
}

TrajectorySet filter_short(const TrajectorySet& ts, int min_len) {
  if (min_len < 1) throw std::invalid_argument("filter_short: min_len must be >= 1");
  std::vector<FeatureTrajectory> kept;
  for (const auto& tr : ts.trajectories())
    if (tr.length() > min_len) kept.push_back(tr);
  if (ts.bounds_checked()) return TrajectorySet(std::move(kept), ts.frame_count(), ts.frame_size());
  return TrajectorySet::unchecked(std::move(kept), ts.frame_count(), ts.frame_size());
}

void write_trajectories(std::ostream& out, const TrajectorySet& ts) {
  out << ts.frame_count() << ' ' << ts.frame_size().width << ' ' << ts.frame_size().height << '\n';
  char buf[64];
  for (const auto& tr : ts.trajectories()) {
    out << tr.id << ' ' << tr.start_frame;
    for (const auto& p : tr.points) {
      std::snprintf(buf, sizeof(buf), " %.17g %.17g", p.x, p.y);
      out << buf;
    }
    out << '\n';
  }
}

namespace {

template <typename T>
T parse_number(std::string_view token, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("invalid number '" + std::string(token) + "'", line);
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

TrajectorySet read_trajectories(std::istream& in, bool check_bounds) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> tok;
  while (tok.empty()) {
    if (!std::getline(in, line)) throw ParseError("missing header `T W H`");
    ++line_no;
    tok = split_ws(line);
  }
  if (tok.size() != 3) throw ParseError("header must be `T W H`", line_no);
  const int frame_count = parse_number<int>(tok[0], line_no);
  const FrameSize size{parse_number<int>(tok[1], line_no), parse_number<int>(tok[2], line_no)};
  if (frame_count < 0 || size.width < 1 || size.height < 1) throw ParseError("invalid header values", line_no);

  std::vector<FeatureTrajectory> trajectories;
  while (std::getline(in, line)) {
    ++line_no;
    tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() < 4 || tok.size() % 2 != 0)
      throw ParseError("record must be `id s x0 y0 ...` with at least one point", line_no);
    FeatureTrajectory tr;
    tr.id = parse_number<int>(tok[0], line_no);
    tr.start_frame = parse_number<int>(tok[1], line_no);
    for (std::size_t i = 2; i < tok.size(); i += 2)
      tr.points.push_back({parse_number<double>(tok[i], line_no), parse_number<double>(tok[i + 1], line_no)});
    if (tr.start_frame < 0 || tr.end_frame() >= frame_count)
      throw ParseError("trajectory " + std::to_string(tr.id) + ": frames [" + std::to_string(tr.start_frame) +
                           ", " + std::to_string(tr.end_frame()) + "] exceed frame count " +
                           std::to_string(frame_count),
                       line_no);
    trajectories.push_back(std::move(tr));
  }
  try {
    if (check_bounds) return TrajectorySet(std::move(trajectories), frame_count, size);
    return TrajectorySet::unchecked(std::move(trajectories), frame_count, size);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

void save_trajectories(const TrajectorySet& ts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_trajectories(out, ts);
  if (!out) throw IoError("write failed: " + path.string());
}

TrajectorySet load_trajectories(const std::filesystem::path& path, bool check_bounds) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_trajectories(in, check_bounds);
}

}  // namespace meshstab

#include "meshstab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace meshstab {
namespace {

double cubic(const std::array<double, 4>& c, double u) { return c[0] + u * (c[1] + u * (c[2] + u * c[3])); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Lattice value in [-1, 1].
double lattice(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x632be59bd9b4e019ULL +
                                                       static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1p-53 * 2.0 - 1.0;
}

double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  double u = x - fx, v = y - fy;
  u = u * u * (3.0 - 2.0 * u);
  v = v * v * (3.0 - 2.0 * v);
  const double a = lattice(seed, ix, iy), b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1), d = lattice(seed, ix + 1, iy + 1);
  return (1 - v) * ((1 - u) * a + u * b) + v * ((1 - u) * c + u * d);
}

Point2 foreground_offset(const SceneSpec& spec, int t) {
  const double phase = 2.0 * std::numbers::pi * t / spec.foreground_period;
  return {spec.foreground_amplitude * std::sin(phase), 0.5 * spec.foreground_amplitude * std::sin(0.5 * phase)};
}

bool all_collinear(const std::vector<Point2>& pts) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i] == pts[0]) continue;
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (orient2d(pts[0], pts[i], pts[j]) != 0) return false;
    return true;
  }
  return true;
}

}  // namespace

Point2 apply_jitter(const FrameJitter& j, Point2 center, Point2 truth) {
  // Written as truth + (R v - v) + shift so that a zero jitter is an exact
  // identity in floating point.
  const Point2 v = truth - center;
  const double c = std::cos(j.angle) - 1.0;
  const double s = std::sin(j.angle);
  return truth + Point2{c * v.x - s * v.y, s * v.x + c * v.y} + j.shift;
}

SyntheticScene synthesize_scene(const SceneSpec& spec, std::uint64_t seed) {
  const int n_points = spec.points.empty() ? spec.background_points + spec.foreground_points
                                           : static_cast<int>(spec.points.size());
  if (n_points < 4) throw std::invalid_argument("scene needs at least 4 points");
  if (spec.frame_count < 10) throw std::invalid_argument("scene needs at least 10 frames");
  if (spec.width < 16 || spec.height < 16) throw std::invalid_argument("scene frame too small");
  if (spec.foreground_points < 0 || spec.foreground_points > n_points)
    throw std::invalid_argument("invalid foreground point count");
  if (spec.jitter_translation < 0 || spec.jitter_rotation_deg < 0 || spec.margin < 0)
    throw std::invalid_argument("jitter amplitudes and margin must be non-negative");
  if (!spec.points.empty() && all_collinear(spec.points))
    throw std::invalid_argument("scene points are collinear");

  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
  };

  const int T = spec.frame_count;
  const Point2 center{0.5 * (spec.width - 1), 0.5 * (spec.height - 1)};

  SyntheticScene scene;
  scene.texture_seed = splitmix64(seed ^ 0x5eedULL);
  scene.jitter.resize(static_cast<std::size_t>(T));
  scene.camera_offset.resize(static_cast<std::size_t>(T));
  const double max_angle = spec.jitter_rotation_deg * std::numbers::pi / 180.0;
  for (int t = 0; t < T; ++t) {
    const double u = static_cast<double>(t) / (T - 1);
    scene.camera_offset[t] = Point2{cubic(spec.path_x, u), cubic(spec.path_y, u)} -
                             Point2{cubic(spec.path_x, 0.0), cubic(spec.path_y, 0.0)};
    auto& j = scene.jitter[t];
    j.angle = uniform(-max_angle, max_angle);
    j.shift = {uniform(-spec.jitter_translation, spec.jitter_translation),
               uniform(-spec.jitter_translation, spec.jitter_translation)};
  }

  const int first_foreground = n_points - spec.foreground_points;
  const double xmax = spec.width - 1, ymax = spec.height - 1;
  auto inside = [&](Point2 p) { return p.x >= 0 && p.y >= 0 && p.x <= xmax && p.y <= ymax; };

  auto make_paths = [&](Point2 p0, bool fg, std::vector<Point2>& truth, std::vector<Point2>& shaky) {
    truth.resize(static_cast<std::size_t>(T));
    shaky.resize(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      Point2 q = p0 - scene.camera_offset[t];
      if (fg) q = q + foreground_offset(spec, t);
      truth[t] = q;
      shaky[t] = apply_jitter(scene.jitter[t], center, q);
      if (!inside(q) || !inside(shaky[t])) return false;
    }
    return true;
  };

  Point2 fg_center{uniform(spec.margin + 30, xmax - spec.margin - 30),
                   uniform(spec.margin + 30, ymax - spec.margin - 30)};

  std::vector<FeatureTrajectory> truth_tracks, shaky_tracks;
  scene.foreground.assign(static_cast<std::size_t>(n_points), false);
  std::vector<Point2> truth_path, shaky_path;
  for (int id = 0; id < n_points; ++id) {
    const bool fg = id >= first_foreground;
    scene.foreground[id] = fg;
    bool ok = false;
    if (!spec.points.empty()) {
      ok = make_paths(spec.points[id], fg, truth_path, shaky_path);
      if (!ok) throw std::invalid_argument("explicit scene point " + std::to_string(id) + " leaves the frame");
    } else {
      for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        Point2 p0;
        if (fg) {
          const double r = 25.0 * std::sqrt(uniform(0, 1));
          const double a = uniform(0, 2 * std::numbers::pi);
          p0 = fg_center + Point2{r * std::cos(a), r * std::sin(a)};
        } else {
          p0 = {uniform(spec.margin, xmax - spec.margin), uniform(spec.margin, ymax - spec.margin)};
        }
        ok = make_paths(p0, fg, truth_path, shaky_path);
      }
      if (!ok) throw std::invalid_argument("could not place scene point inside the frame; reduce motion");
    }
    truth_tracks.push_back({id, 0, truth_path});
    shaky_tracks.push_back({id, 0, shaky_path});
  }

  std::vector<Point2> firsts;
  for (const auto& tr : truth_tracks) firsts.push_back(tr.points.front());
  if (all_collinear(firsts)) throw std::invalid_argument("scene points are collinear");

  const FrameSize size{spec.width, spec.height};
  scene.truth = TrajectorySet(std::move(truth_tracks), T, size);
  scene.shaky = TrajectorySet(std::move(shaky_tracks), T, size);
  return scene;
}

double scene_texture(std::uint64_t seed, Point2 w) {
  const double coarse = value_noise(seed, w.x / 11.0, w.y / 11.0);
  const double fine = value_noise(seed + 1, w.x / 4.5, w.y / 4.5);
  const double v = 128.0 + 80.0 * coarse + 45.0 * fine + 20.0 * std::sin(0.05 * w.x + 0.03 * w.y);
  return std::clamp(v, 0.0, 255.0);
}

std::vector<GrayFrame> render_scene_frames(const SceneSpec& spec, const SyntheticScene& scene, bool jitter) {
  const Point2 center{0.5 * (spec.width - 1), 0.5 * (spec.height - 1)};
  std::vector<GrayFrame> frames;
  frames.reserve(scene.jitter.size());
  for (std::size_t t = 0; t < scene.jitter.size(); ++t) {
    const FrameJitter& j = scene.jitter[t];
    const double c = jitter ? std::cos(j.angle) : 1.0;
    const double s = jitter ? std::sin(j.angle) : 0.0;
    const Point2 shift = jitter ? j.shift : Point2{};
    GrayFrame f(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        // Invert shaky = c + R (truth - c) + shift.
        const Point2 v = Point2{double(x), double(y)} - center - shift;
        const Point2 truth = center + Point2{c * v.x + s * v.y, -s * v.x + c * v.y};
        const Point2 world = truth + scene.camera_offset[t];
        f.at(x, y) = static_cast<std::uint8_t>(std::lround(scene_texture(scene.texture_seed, world)));
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace meshstab

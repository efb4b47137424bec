#include "meshstab/tracker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace meshstab {

void TrackerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("tracker config: ") + what);
  };
  require(grid_rows >= 1 && grid_cols >= 1, "grid rows and cols must be >= 1");
  require(global_corner_target >= 1, "global_corner_target must be >= 1");
  require(min_per_cell >= 0, "min_per_cell must be >= 0");
  require(redetect_fraction > 0.0 && redetect_fraction <= 1.0, "redetect_fraction must be in (0, 1]");
  require(pyramid_levels >= 1, "pyramid_levels must be >= 1");
  require(window >= 3 && window % 2 == 1, "window must be odd and >= 3");
  require(fb_error_max > 0.0, "fb_error_max must be positive");
  require(quality_level > 0.0 && quality_level <= 1.0, "quality_level must be in (0, 1]");
  require(cell_relaxation > 0.0 && cell_relaxation < 1.0, "cell_relaxation must be in (0, 1)");
  require(block_size >= 3 && block_size % 2 == 1, "block_size must be odd and >= 3");
  require(min_distance >= 0.0, "min_distance must be >= 0");
  require(max_iterations >= 1, "max_iterations must be >= 1");
  require(convergence_eps > 0.0, "convergence_eps must be positive");
  require(min_eigen_threshold >= 0.0, "min_eigen_threshold must be >= 0");
  require(min_trajectory_length >= 1, "min_trajectory_length must be >= 1");
}

std::vector<double> corner_response(const GrayFrame& frame, int block_size) {
  const int w = frame.width(), h = frame.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> gxx(n, 0.0), gyy(n, 0.0), gxy(n, 0.0);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      auto p = [&](int dx, int dy) { return static_cast<double>(frame.at(x + dx, y + dy)); };
      const double ix = ((p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1))) / 8.0;
      const double iy = ((p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1))) / 8.0;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gxx[i] = ix * ix;
      gyy[i] = iy * iy;
      gxy[i] = ix * iy;
    }
  }
  const int r = block_size / 2;
  std::vector<double> response(n, 0.0);
  for (int y = r + 1; y + r + 1 < h; ++y) {
    for (int x = r + 1; x + r + 1 < w; ++x) {
      double a = 0, b = 0, c = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const std::size_t row = static_cast<std::size_t>(y + dy) * w;
        for (int dx = -r; dx <= r; ++dx) {
          a += gxx[row + x + dx];
          b += gxy[row + x + dx];
          c += gyy[row + x + dx];
        }
      }
      const double half_trace = 0.5 * (a + c);
      const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      response[static_cast<std::size_t>(y) * w + x] = std::max(0.0, half_trace - disc);
    }
  }
  return response;
}

namespace {

bool score_order(const Corner& a, const Corner& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.position.y != b.position.y) return a.position.y < b.position.y;
  return a.position.x < b.position.x;
}

bool far_from_all(Point2 p, const std::vector<Corner>& accepted, double min_distance) {
  const double d2 = min_distance * min_distance;
  for (const auto& c : accepted)
    if (squared_norm(c.position - p) < d2) return false;
  return true;
}

// ---- pyramid support for Lucas-Kanade ----

struct ImageF {
  int w = 0, h = 0;
  std::vector<float> v;
  float at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
  float sample(double x, double y) const {
    x = std::clamp(x, 0.0, double(w - 1));
    y = std::clamp(y, 0.0, double(h - 1));
    const int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
    const int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
    const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0, fy = y - y0;
    return static_cast<float>((1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x1, y0)) +
                              fy * ((1 - fx) * at(x0, y1) + fx * at(x1, y1)));
  }
};

ImageF to_float(const GrayFrame& f) {
  ImageF out{f.width(), f.height(), std::vector<float>(f.data().begin(), f.data().end())};
  return out;
}

int reflect(int i, int n) {
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return std::clamp(i, 0, n - 1);
}

ImageF downsample(const ImageF& src) {
  static constexpr std::array<float, 5> k{1 / 16.f, 4 / 16.f, 6 / 16.f, 4 / 16.f, 1 / 16.f};
  ImageF tmp{src.w, src.h, std::vector<float>(src.v.size())};
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * src.at(reflect(x + i, src.w), y);
      tmp.v[static_cast<std::size_t>(y) * src.w + x] = s;
    }
  ImageF out{(src.w + 1) / 2, (src.h + 1) / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.w) * out.h);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp.at(2 * x, reflect(2 * y + i, src.h));
      out.v[static_cast<std::size_t>(y) * out.w + x] = s;
    }
  return out;
}

struct Pyramid {
  std::vector<ImageF> image, gx, gy;
};

Pyramid build_pyramid(const GrayFrame& frame, int levels) {
  Pyramid p;
  p.image.push_back(to_float(frame));
  while (static_cast<int>(p.image.size()) < levels && p.image.back().w >= 16 && p.image.back().h >= 16)
    p.image.push_back(downsample(p.image.back()));
  for (const auto& img : p.image) {
    ImageF gx{img.w, img.h, std::vector<float>(img.v.size())};
    ImageF gy = gx;
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * img.w + x;
        gx.v[i] = 0.5f * (img.at(std::min(x + 1, img.w - 1), y) - img.at(std::max(x - 1, 0), y));
        gy.v[i] = 0.5f * (img.at(x, std::min(y + 1, img.h - 1)) - img.at(x, std::max(y - 1, 0)));
      }
    p.gx.push_back(std::move(gx));
    p.gy.push_back(std::move(gy));
  }
  return p;
}

std::optional<Point2> lk_single(const Pyramid& from, const Pyramid& to, Point2 p, const TrackerConfig& cfg) {
  const int half = cfg.window / 2;
  const int side = 2 * half + 1;
  const double area = static_cast<double>(side) * side;
  const int top = static_cast<int>(std::min(from.image.size(), to.image.size())) - 1;
  std::vector<float> wi(static_cast<std::size_t>(side) * side), wx(wi.size()), wy(wi.size());

  Point2 guess{};
  Point2 flow{};
  for (int level = top; level >= 0; --level) {
    const double scale = std::ldexp(1.0, -level);
    const Point2 pl = p * scale;
    const ImageF& I = from.image[level];
    const ImageF& J = to.image[level];
    double gxx = 0, gxy = 0, gyy = 0;
    std::size_t k = 0;
    for (int dy = -half; dy <= half; ++dy)
      for (int dx = -half; dx <= half; ++dx, ++k) {
        const double x = pl.x + dx, y = pl.y + dy;
        wi[k] = I.sample(x, y);
        wx[k] = from.gx[level].sample(x, y);
        wy[k] = from.gy[level].sample(x, y);
        gxx += double(wx[k]) * wx[k];
        gxy += double(wx[k]) * wy[k];
        gyy += double(wy[k]) * wy[k];
      }
    const double det = gxx * gyy - gxy * gxy;
    const double norm = area * 255.0 * 255.0;
    const double min_eig = (0.5 * (gxx + gyy) - std::sqrt(0.25 * (gxx - gyy) * (gxx - gyy) + gxy * gxy)) / norm;
    Point2 nu{};
    if (level == 0 && min_eig < cfg.min_eigen_threshold) return std::nullopt;
    if (min_eig > 1e-12 && det > 0) {
      for (int it = 0; it < cfg.max_iterations; ++it) {
        const Point2 q = pl + guess + nu;
        if (q.x < -half || q.y < -half || q.x > J.w - 1 + half || q.y > J.h - 1 + half) return std::nullopt;
        double bx = 0, by = 0;
        k = 0;
        for (int dy = -half; dy <= half; ++dy)
          for (int dx = -half; dx <= half; ++dx, ++k) {
            const double diff = double(wi[k]) - J.sample(q.x + dx, q.y + dy);
            bx += diff * wx[k];
            by += diff * wy[k];
          }
        const Point2 eta{(gyy * bx - gxy * by) / det, (gxx * by - gxy * bx) / det};
        nu = nu + eta;
        if (squared_norm(eta) < cfg.convergence_eps * cfg.convergence_eps) break;
      }
    }
    if (level > 0) {
      guess = 2.0 * (guess + nu);
    } else {
      flow = guess + nu;
    }
  }
  const Point2 out = p + flow;
  const ImageF& base = to.image[0];
  if (!is_finite(out) || out.x < 0 || out.y < 0 || out.x > base.w - 1 || out.y > base.h - 1) return std::nullopt;
  return out;
}

}  // namespace

std::vector<Corner> detect_scored_corners(const GrayFrame& frame, const TrackerConfig& cfg) {
  cfg.validate();
  if (frame.width() < 32 || frame.height() < 32)
    throw std::invalid_argument("detect_corners: frame must be at least 32x32");
  const int w = frame.width(), h = frame.height();
  const auto response = corner_response(frame, cfg.block_size);
  const double max_score = *std::max_element(response.begin(), response.end());
  if (!(max_score > 0.0)) return {};

  std::vector<Corner> candidates;
  for (int y = 1; y + 1 < h; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      const double s = response[static_cast<std::size_t>(y) * w + x];
      if (s <= 0.0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy) && response[static_cast<std::size_t>(y + dy) * w + x + dx] > s) {
            is_max = false;
            break;
          }
      if (is_max) candidates.push_back({{double(x), double(y)}, s});
    }
  std::sort(candidates.begin(), candidates.end(), score_order);

  const double threshold = cfg.quality_level * max_score;
  std::vector<Corner> accepted;
  for (const auto& c : candidates) {
    if (static_cast<int>(accepted.size()) >= cfg.global_corner_target || c.score < threshold) break;
    if (far_from_all(c.position, accepted, cfg.min_distance)) accepted.push_back(c);
  }

  const double floor = max_score * 1e-12;
  for (int r = 0; r < cfg.grid_rows; ++r) {
    for (int col = 0; col < cfg.grid_cols; ++col) {
      const double x0 = double(col) * w / cfg.grid_cols, x1 = double(col + 1) * w / cfg.grid_cols;
      const double y0 = double(r) * h / cfg.grid_rows, y1 = double(r + 1) * h / cfg.grid_rows;
      auto in_cell = [&](Point2 p) { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; };
      int count = static_cast<int>(std::count_if(accepted.begin(), accepted.end(),
                                                 [&](const Corner& c) { return in_cell(c.position); }));
      double local = threshold * cfg.cell_relaxation;
      while (count < cfg.min_per_cell && local >= floor) {
        for (const auto& c : candidates) {
          if (count >= cfg.min_per_cell) break;
          if (!in_cell(c.position) || c.score < local) continue;
          if (far_from_all(c.position, accepted, cfg.min_distance)) {
            accepted.push_back(c);
            ++count;
          }
        }
        local *= cfg.cell_relaxation;
      }
    }
  }
  std::sort(accepted.begin(), accepted.end(), score_order);
  return accepted;
}

std::vector<Point2> detect_corners(const GrayFrame& frame, const TrackerConfig& cfg) {
  const auto scored = detect_scored_corners(frame, cfg);
  std::vector<Point2> out;
  out.reserve(scored.size());
  for (const auto& c : scored) out.push_back(c.position);
  return out;
}

namespace {

std::vector<std::optional<Point2>> track_with_pyramids(const Pyramid& prev, const Pyramid& next,
                                                       std::span<const Point2> points, const TrackerConfig& cfg) {
  std::vector<std::optional<Point2>> out(points.size());
  const double fb2 = cfg.fb_error_max * cfg.fb_error_max;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto fwd = lk_single(prev, next, points[i], cfg);
    if (!fwd) continue;
    const auto back = lk_single(next, prev, *fwd, cfg);
    if (!back || squared_norm(*back - points[i]) > fb2) continue;
    out[i] = fwd;
  }
  return out;
}

}  // namespace

std::vector<std::optional<Point2>> track_frame_pair(const GrayFrame& prev, const GrayFrame& next,
                                                    std::span<const Point2> points, const TrackerConfig& cfg) {
  cfg.validate();
  if (prev.width() != next.width() || prev.height() != next.height())
    throw std::invalid_argument("track_frame_pair: frame sizes differ");
  const Pyramid a = build_pyramid(prev, cfg.pyramid_levels);
  const Pyramid b = build_pyramid(next, cfg.pyramid_levels);
  return track_with_pyramids(a, b, points, cfg);
}

TrajectorySet build_trajectories(std::span<const GrayFrame> frames, const TrackerConfig& cfg) {
  cfg.validate();
  if (frames.size() < 2) throw std::invalid_argument("build_trajectories: need at least 2 frames");
  const int w = frames[0].width(), h = frames[0].height();
  for (const auto& f : frames)
    if (f.width() != w || f.height() != h) throw std::invalid_argument("build_trajectories: frame sizes differ");

  struct Track {
    int id;
    int start;
    std::vector<Point2> points;
  };
  std::vector<Track> active, finished;
  int next_id = 0;
  for (const auto& p : detect_corners(frames[0], cfg)) active.push_back({next_id++, 0, {p}});

  Pyramid prev = build_pyramid(frames[0], cfg.pyramid_levels);
  std::vector<Point2> positions;
  for (std::size_t t = 1; t < frames.size(); ++t) {
    Pyramid cur = build_pyramid(frames[t], cfg.pyramid_levels);
    positions.clear();
    for (const auto& tr : active) positions.push_back(tr.points.back());
    const auto tracked = track_with_pyramids(prev, cur, positions, cfg);

    std::vector<Track> still;
    still.reserve(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (tracked[i]) {
        active[i].points.push_back(*tracked[i]);
        still.push_back(std::move(active[i]));
      } else {
        finished.push_back(std::move(active[i]));
      }
    }
    active = std::move(still);

    if (static_cast<double>(active.size()) < cfg.redetect_fraction * cfg.global_corner_target) {
      const double d2 = cfg.min_distance * cfg.min_distance;
      for (const auto& p : detect_corners(frames[t], cfg)) {
        const bool clear = std::none_of(active.begin(), active.end(),
                                        [&](const Track& tr) { return squared_norm(tr.points.back() - p) < d2; });
        if (clear) active.push_back({next_id++, static_cast<int>(t), {p}});
      }
    }
    prev = std::move(cur);
  }
  for (auto& tr : active) finished.push_back(std::move(tr));

  std::vector<FeatureTrajectory> out;
  out.reserve(finished.size());
  for (auto& tr : finished) out.push_back({tr.id, tr.start, std::move(tr.points)});
  TrajectorySet all(std::move(out), static_cast<int>(frames.size()), {w, h});
  return filter_short(all, cfg.min_trajectory_length);
}

}  // namespace meshstab

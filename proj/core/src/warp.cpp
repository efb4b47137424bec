#include "meshstab/warp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "meshstab/errors.hpp"

namespace meshstab {
namespace {

constexpr double kInsideTolerance = 1e-9;

std::array<Point2, 3> corners(std::span<const Point2> v, const TriangleIndices& t) {
  return {v[static_cast<std::size_t>(t[0])], v[static_cast<std::size_t>(t[1])], v[static_cast<std::size_t>(t[2])]};
}

bool point_in_polygon(std::span<const Point2> poly, Point2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

// Liang-Barsky: does segment ab meet the closed rectangle?
bool segment_meets_rect(Point2 a, Point2 b, const Rect& r) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.x0, r.x1 - a.x, a.y - r.y0, r.y1 - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double u = q[k] / p[k];
    if (p[k] < 0.0)
      t0 = std::max(t0, u);
    else
      t1 = std::min(t1, u);
    if (t0 > t1) return false;
  }
  return true;
}

bool rect_inside_polygon(const Rect& rect, std::span<const Point2> poly) {
  constexpr double kShrink = 1e-9;
  const Rect r{rect.x0 + kShrink, rect.y0 + kShrink, rect.x1 - kShrink, rect.y1 - kShrink};
  for (Point2 c : {Point2{r.x0, r.y0}, Point2{r.x1, r.y0}, Point2{r.x1, r.y1}, Point2{r.x0, r.y1}})
    if (!point_in_polygon(poly, c)) return false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    if (segment_meets_rect(poly[j], poly[i], r)) return false;
  return true;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

template <typename T>
T parse_number(const std::string& tok, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("invalid number '" + tok + "'", line);
  return value;
}

}  // namespace

AffineMap triangle_affine(const std::array<Point2, 3>& src, const std::array<Point2, 3>& dst) {
  const Point2 e1 = src[1] - src[0], e2 = src[2] - src[0];
  const double det = cross(e1, e2);
  if (!(std::abs(det) * 0.5 >= kAreaEpsilon)) throw DegenerateGeometry("triangle_affine: degenerate source triangle");
  const Point2 f1 = dst[1] - dst[0], f2 = dst[2] - dst[0];
  // L [e1 e2] = [f1 f2]  =>  L = [f1 f2] [e1 e2]^-1
  const double i00 = e2.y / det, i01 = -e2.x / det, i10 = -e1.y / det, i11 = e1.x / det;
  AffineMap a;
  a.m[0] = f1.x * i00 + f2.x * i10;
  a.m[1] = f1.x * i01 + f2.x * i11;
  a.m[3] = f1.y * i00 + f2.y * i10;
  a.m[4] = f1.y * i01 + f2.y * i11;
  a.m[2] = dst[0].x - (a.m[0] * src[0].x + a.m[1] * src[0].y);
  a.m[5] = dst[0].y - (a.m[3] * src[0].x + a.m[4] * src[0].y);
  return a;
}

int FrameWarp::flipped_count() const {
  return static_cast<int>(std::count(flipped.begin(), flipped.end(), 1));
}

int WarpField::flipped_count() const {
  int n = 0;
  for (const auto& f : frames) n += f.flipped_count();
  return n;
}

namespace {

void finish_frame_warp(FrameWarp& w) {
  w.maps.clear();
  w.flipped.clear();
  for (const auto& t : w.triangles) {
    w.maps.push_back(triangle_affine(corners(w.original, t), corners(w.stabilized, t)));
    const auto s = corners(w.stabilized, t);
    w.flipped.push_back(orient2d(s[0], s[1], s[2]) <= 0 ? 1 : 0);
  }
}

}  // namespace

FrameWarp build_frame_warp(const FrameMesh& mesh, std::span<const Point2> stabilized_features,
                           const FrameControls& controls) {
  if (static_cast<int>(stabilized_features.size()) != mesh.feature_count())
    throw std::invalid_argument("build_frame_warp: feature count mismatch");
  FrameWarp w;
  w.frame = mesh.frame;
  for (int v = 0; v < mesh.vertex_count(); ++v) w.original.push_back(mesh.vertex(v));
  w.stabilized.assign(stabilized_features.begin(), stabilized_features.end());
  w.stabilized.insert(w.stabilized.end(), controls.points.begin(), controls.points.end());
  w.triangles = mesh.triangles;
  finish_frame_warp(w);
  return w;
}

WarpField build_warp_field(std::span<const FrameMesh> meshes, const TrajectorySet& stabilized,
                           std::span<const FrameControls> controls) {
  if (meshes.size() != controls.size()) throw std::invalid_argument("build_warp_field: one control set per mesh");
  WarpField field;
  field.frame_count = static_cast<int>(meshes.size());
  field.size = stabilized.frame_size();
  for (std::size_t t = 0; t < meshes.size(); ++t)
    field.frames.push_back(
        build_frame_warp(meshes[t], stabilized_feature_positions(meshes[t], stabilized), controls[t]));
  return field;
}

std::vector<double> render_values(const GrayFrame& frame, const FrameWarp& warp, RenderStats* stats) {
  const int w = frame.width(), h = frame.height();
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<int> owner(out.size(), -1);
  RenderStats local;

  for (std::size_t k = 0; k < warp.triangles.size(); ++k) {
    const auto d = corners(warp.stabilized, warp.triangles[k]);
    const auto s = corners(warp.original, warp.triangles[k]);
    const double det = signed_area2(d[0], d[1], d[2]);
    if (std::abs(det) * 0.5 < kAreaEpsilon) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({d[0].x, d[1].x, d[2].x}) - kInsideTolerance)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({d[0].x, d[1].x, d[2].x}) + kInsideTolerance)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({d[0].y, d[1].y, d[2].y}) - kInsideTolerance)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({d[0].y, d[1].y, d[2].y}) + kInsideTolerance)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        if (owner[idx] >= 0) continue;
        const Point2 p{static_cast<double>(x), static_cast<double>(y)};
        const double l0 = signed_area2(p, d[1], d[2]) / det;
        const double l1 = signed_area2(d[0], p, d[2]) / det;
        const double l2 = signed_area2(d[0], d[1], p) / det;
        if (l0 < -kInsideTolerance || l1 < -kInsideTolerance || l2 < -kInsideTolerance) continue;
        owner[idx] = static_cast<int>(k);
        const Point2 q = l0 * s[0] + l1 * s[1] + l2 * s[2];
        double v = 0.0;
        if (sample_bilinear(frame, q.x, q.y, v))
          out[idx] = v;
        else
          ++local.outside_source;
      }
  }
  local.uncovered = std::count(owner.begin(), owner.end(), -1);
  if (stats) *stats = local;
  return out;
}

GrayFrame render(const GrayFrame& frame, const FrameWarp& warp, RenderStats* stats) {
  const auto values = render_values(frame, warp, stats);
  std::vector<std::uint8_t> data(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(values[i]), 0L, 255L));
  return GrayFrame(frame.width(), frame.height(), std::move(data));
}

CropResult common_crop(const WarpField& field) {
  const double xm = field.size.width - 1, ym = field.size.height - 1;
  const Rect full{0.0, 0.0, xm, ym};
  const auto rect_at = [&](double s) {
    const double cx = xm / 2, cy = ym / 2, hx = s * xm / 2, hy = s * ym / 2;
    return Rect{cx - hx, cy - hy, cx + hx, cy + hy};
  };
  std::vector<std::vector<Point2>> polygons;
  for (const auto& f : field.frames)
    polygons.emplace_back(f.stabilized.end() - kControlPointCount, f.stabilized.end());
  const auto fits = [&](double s) {
    const Rect r = rect_at(s);
    return std::all_of(polygons.begin(), polygons.end(),
                       [&](const std::vector<Point2>& poly) { return rect_inside_polygon(r, poly); });
  };

  if (fits(1.0)) return {full, false};
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 32; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
  }
  if (lo == 0.0) {
    std::cerr << "warning: stabilized frames share no common centred region; keeping the full frame\n";
    return {full, true};
  }
  return {rect_at(lo), false};
}

GrayFrame crop(const GrayFrame& frame, const Rect& rect) {
  const int x0 = std::max(0, static_cast<int>(std::ceil(rect.x0 - 1e-9)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(rect.y0 - 1e-9)));
  const int x1 = std::min(frame.width() - 1, static_cast<int>(std::floor(rect.x1 + 1e-9)));
  const int y1 = std::min(frame.height() - 1, static_cast<int>(std::floor(rect.y1 + 1e-9)));
  if (x1 < x0 || y1 < y0) throw std::invalid_argument("crop: empty rectangle");
  GrayFrame out(x1 - x0 + 1, y1 - y0 + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) out.at(x - x0, y - y0) = frame.at(x, y);
  return out;
}

void write_warp_field(std::ostream& out, const WarpField& field) {
  char buf[512];
  out << field.frame_count << ' ' << field.size.width << ' ' << field.size.height << '\n';
  for (const auto& f : field.frames) {
    out << "frame " << f.frame << ' ' << f.original.size() << ' ' << f.triangles.size() << '\n';
    for (std::size_t v = 0; v < f.original.size(); ++v) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", f.original[v].x, f.original[v].y,
                    f.stabilized[v].x, f.stabilized[v].y);
      out << buf;
    }
    for (std::size_t k = 0; k < f.triangles.size(); ++k) {
      const auto& m = f.maps[k].m;
      const auto& t = f.triangles[k];
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %d %d %d\n", m[0], m[1], m[2], m[3],
                    m[4], m[5], t[0], t[1], t[2]);
      out << buf;
    }
  }
}

WarpField read_warp_field(std::istream& in) {
  std::size_t lineno = 0;
  std::string line;
  const auto next = [&]() {
    while (std::getline(in, line)) {
      ++lineno;
      auto toks = split(line);
      if (!toks.empty()) return toks;
    }
    throw ParseError("unexpected end of warp field", lineno);
  };
  auto head = next();
  if (head.size() != 3) throw ParseError("header must be 'T W H'", lineno);
  WarpField field;
  field.frame_count = parse_number<int>(head[0], lineno);
  field.size = {parse_number<int>(head[1], lineno), parse_number<int>(head[2], lineno)};
  if (field.frame_count < 0 || field.size.width < 2 || field.size.height < 2)
    throw ParseError("invalid header values", lineno);
  for (int t = 0; t < field.frame_count; ++t) {
    auto fh = next();
    if (fh.size() != 4 || fh[0] != "frame") throw ParseError("expected 'frame t V K'", lineno);
    FrameWarp f;
    f.frame = parse_number<int>(fh[1], lineno);
    const int nv = parse_number<int>(fh[2], lineno), nt = parse_number<int>(fh[3], lineno);
    if (nv < kControlPointCount || nt < 1) throw ParseError("invalid vertex or triangle count", lineno);
    for (int v = 0; v < nv; ++v) {
      auto tok = next();
      if (tok.size() != 4) throw ParseError("vertex line needs 4 values", lineno);
      f.original.push_back({parse_number<double>(tok[0], lineno), parse_number<double>(tok[1], lineno)});
      f.stabilized.push_back({parse_number<double>(tok[2], lineno), parse_number<double>(tok[3], lineno)});
    }
    std::vector<AffineMap> maps;
    for (int k = 0; k < nt; ++k) {
      auto tok = next();
      if (tok.size() != 9) throw ParseError("triangle line needs 9 values", lineno);
      AffineMap a;
      for (int j = 0; j < 6; ++j) a.m[static_cast<std::size_t>(j)] = parse_number<double>(tok[static_cast<std::size_t>(j)], lineno);
      TriangleIndices tri{};
      for (int j = 0; j < 3; ++j) {
        tri[static_cast<std::size_t>(j)] = parse_number<int>(tok[static_cast<std::size_t>(6 + j)], lineno);
        if (tri[static_cast<std::size_t>(j)] < 0 || tri[static_cast<std::size_t>(j)] >= nv)
          throw ParseError("triangle vertex index out of range", lineno);
      }
      f.triangles.push_back(tri);
      maps.push_back(a);
    }
    try {
      finish_frame_warp(f);
    } catch (const DegenerateGeometry& e) {
      throw ParseError(std::string("frame ") + std::to_string(t) + ": " + e.what(), lineno);
    }
    f.maps = std::move(maps);
    field.frames.push_back(std::move(f));
  }
  return field;
}

void save_warp_field(const WarpField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_warp_field(out, field);
  if (!out) throw IoError("failed writing " + path.string());
}

WarpField load_warp_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_warp_field(in);
}

}  // namespace meshstab

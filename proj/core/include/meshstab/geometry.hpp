#pragma once

#include <cmath>

namespace meshstab {

/// Image-plane position in pixels; x grows right, y grows down.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
constexpr double squared_norm(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Rotation by the fixed matrix [0 1; -1 0].
constexpr Point2 rotate90(Point2 p) { return {p.y, -p.x}; }

/// Twice the signed area; positive when (a, b, c) turns counter-clockwise in
/// a y-up frame.
constexpr double signed_area2(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

/// Closed axis-aligned rectangle.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  constexpr double width() const { return x1 - x0; }
  constexpr double height() const { return y1 - y0; }
  constexpr double area() const { return width() * height(); }
  constexpr bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

/// Sign of the orientation determinant of (a, b, c): +1, 0 or -1. Exact for
/// all finite inputs.
int orient2d(Point2 a, Point2 b, Point2 c);

/// Sign of the in-circle determinant: +1 when d lies strictly inside the
/// circumcircle of the counter-clockwise triangle (a, b, c). Exact.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

}  // namespace meshstab

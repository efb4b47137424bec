#include "meshstab/delaunay.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "meshstab/errors.hpp"

namespace meshstab {
namespace {

constexpr int kInfinite = -1;

// Triangulation of the convex hull extended by "ghost" triangles (u, v, INF),
// one per hull edge, whose directed edge u -> v has the exterior on its left.
// A point outside the hull conflicts with the ghosts of the hull edges it
// sees, so hull growth is handled by the same cavity re-triangulation as
// interior insertion.
class IncrementalDelaunay {
 public:
  explicit IncrementalDelaunay(const std::vector<Point2>& v) : v_(v) {}

  void start(int a, int b, int c) {
    if (orient2d(v_[a], v_[b], v_[c]) < 0) std::swap(b, c);
    tris_ = {{a, b, c}, {b, a, kInfinite}, {c, b, kInfinite}, {a, c, kInfinite}};
  }

  void insert(int p) {
    const Point2 q = v_[p];
    cavity_.clear();
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (in_conflict(tris_[i], q)) cavity_.push_back(i);
    if (cavity_.empty()) return;  // coincident with an existing vertex

    edges_.clear();
    for (std::size_t i : cavity_) {
      const auto& t = tris_[i];
      for (int k = 0; k < 3; ++k) edges_.emplace_back(t[k], t[(k + 1) % 3]);
    }
    created_.clear();
    for (const auto& [u, w] : edges_) {
      const bool interior = std::find(edges_.begin(), edges_.end(), std::make_pair(w, u)) != edges_.end();
      if (interior) continue;
      if (u == kInfinite) {
        created_.push_back({w, p, kInfinite});
      } else if (w == kInfinite) {
        created_.push_back({p, u, kInfinite});
      } else {
        if (orient2d(v_[u], v_[w], q) <= 0)
          throw DegenerateGeometry("triangulation invariant violated while inserting a point");
        created_.push_back({u, w, p});
      }
    }

    std::vector<char> dead(tris_.size(), 0);
    for (std::size_t i : cavity_) dead[i] = 1;
    std::size_t out = 0;
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (!dead[i]) tris_[out++] = tris_[i];
    tris_.resize(out);
    tris_.insert(tris_.end(), created_.begin(), created_.end());
  }

  std::vector<TriangleIndices> solid() const {
    std::vector<TriangleIndices> out;
    for (const auto& t : tris_)
      if (t[2] != kInfinite) out.push_back(t);
    return out;
  }

 private:
  bool in_conflict(const TriangleIndices& t, Point2 q) const {
    if (t[2] != kInfinite) return incircle(v_[t[0]], v_[t[1]], v_[t[2]], q) > 0;
    const Point2 u = v_[t[0]], w = v_[t[1]];
    const int o = orient2d(u, w, q);
    if (o != 0) return o > 0;
    // Collinear with the hull edge: conflict only strictly inside it.
    if (u.x != w.x) return (q.x > std::min(u.x, w.x)) && (q.x < std::max(u.x, w.x));
    return (q.y > std::min(u.y, w.y)) && (q.y < std::max(u.y, w.y));
  }

  const std::vector<Point2>& v_;
  std::vector<TriangleIndices> tris_;
  std::vector<std::size_t> cavity_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<TriangleIndices> created_;
};

TriangleIndices canonical(TriangleIndices t) {
  const auto m = std::min_element(t.begin(), t.end()) - t.begin();
  std::rotate(t.begin(), t.begin() + m, t.end());
  return t;
}

}  // namespace

std::vector<TriangleAdjacency> build_adjacency(std::span<const TriangleIndices> triangles) {
  std::map<std::pair<int, int>, std::vector<int>> edge_owner;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& t = triangles[i];
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      edge_owner[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(i));
    }
  }
  std::vector<TriangleAdjacency> out;
  for (const auto& [edge, owners] : edge_owner) {
    if (owners.size() != 2) continue;
    out.push_back({std::min(owners[0], owners[1]), std::max(owners[0], owners[1]), {edge.first, edge.second}});
  }
  std::sort(out.begin(), out.end(), [](const TriangleAdjacency& a, const TriangleAdjacency& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  return out;
}

Triangulation triangulate(std::span<const Point2> points, const std::optional<Rect>& border,
                          double merge_tolerance) {
  Triangulation result;
  const double tol2 = merge_tolerance * merge_tolerance;
  result.input_to_vertex.reserve(points.size());
  for (const Point2& p : points) {
    if (!is_finite(p)) throw std::invalid_argument("triangulate: non-finite point");
    if (border && !border->contains(p)) throw std::invalid_argument("triangulate: point outside the border");
    int found = -1;
    for (std::size_t j = 0; j < result.vertices.size(); ++j)
      if (squared_norm(result.vertices[j] - p) <= tol2) {
        found = static_cast<int>(j);
        break;
      }
    if (found < 0) {
      found = static_cast<int>(result.vertices.size());
      result.vertices.push_back(p);
    }
    result.input_to_vertex.push_back(found);
  }
  if (border) {
    const Rect& r = *border;
    for (Point2 c : {Point2{r.x0, r.y0}, Point2{r.x1, r.y0}, Point2{r.x1, r.y1}, Point2{r.x0, r.y1}}) {
      const bool present = std::any_of(result.vertices.begin(), result.vertices.end(),
                                       [&](Point2 v) { return squared_norm(v - c) <= tol2; });
      if (!present) result.vertices.push_back(c);
    }
  }

  const auto& v = result.vertices;
  if (v.size() < 3) throw DegenerateGeometry("triangulate: fewer than 3 distinct points");

  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::tie(v[a].x, v[a].y, a) < std::tie(v[b].x, v[b].y, b);
  });

  std::size_t third = 2;
  while (third < order.size() && orient2d(v[order[0]], v[order[1]], v[order[third]]) == 0) ++third;
  if (third == order.size()) throw DegenerateGeometry("triangulate: all points are collinear");

  IncrementalDelaunay dt(v);
  dt.start(order[0], order[1], order[third]);
  for (std::size_t i = 2; i < order.size(); ++i)
    if (i != third) dt.insert(order[i]);

  result.triangles = dt.solid();
  for (auto& t : result.triangles) t = canonical(t);
  std::sort(result.triangles.begin(), result.triangles.end());
  result.adjacency = build_adjacency(result.triangles);
  return result;
}

}  // namespace meshstab

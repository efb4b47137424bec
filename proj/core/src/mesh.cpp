#include "meshstab/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "meshstab/errors.hpp"

namespace meshstab {
namespace {

constexpr double kMergeTolerance = 1e-6;

}  // namespace

ControlPointSet make_control_points(int width, int height) {
  if (width < 2 || height < 2) throw std::invalid_argument("make_control_points: frame must be at least 2x2");
  const int n = kControlPointsPerEdge - 1;
  const double w = width - 1, h = height - 1;
  const auto along = [n](double len, int i) { return len * i / n; };
  ControlPointSet set;
  std::size_t k = 0;
  for (int i = 0; i <= n; ++i) set.points[k++] = {along(w, i), 0.0};
  for (int j = 1; j <= n; ++j) set.points[k++] = {w, along(h, j)};
  for (int i = 1; i <= n; ++i) set.points[k++] = {along(w, n - i), h};
  for (int j = 1; j < n; ++j) set.points[k++] = {0.0, along(h, n - j)};
  return set;
}

bool FrameMesh::is_inner(int tri) const {
  const auto& t = triangles.at(static_cast<std::size_t>(tri));
  return !is_control(t[0]) && !is_control(t[1]) && !is_control(t[2]);
}

FrameMesh build_frame_mesh(std::span<const FrameFeature> features, FrameSize size, int frame) {
  FrameMesh mesh;
  mesh.frame = frame;
  mesh.controls = make_control_points(size.width, size.height);
  const double tol2 = kMergeTolerance * kMergeTolerance;

  std::vector<FrameFeature> sorted(features.begin(), features.end());
  std::sort(sorted.begin(), sorted.end(), [](const FrameFeature& a, const FrameFeature& b) { return a.id < b.id; });
  for (const FrameFeature& f : sorted) {
    const auto near = [&](Point2 q) { return squared_norm(q - f.position) <= tol2; };
    const bool dup =
        std::any_of(mesh.features.begin(), mesh.features.end(), [&](const FrameFeature& g) { return near(g.position); }) ||
        std::any_of(mesh.controls.points.begin(), mesh.controls.points.end(), near);
    if (dup)
      mesh.merged_ids.push_back(f.id);
    else
      mesh.features.push_back(f);
  }

  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(mesh.vertex_count()));
  for (const auto& f : mesh.features) pts.push_back(f.position);
  pts.insert(pts.end(), mesh.controls.points.begin(), mesh.controls.points.end());

  const Rect border{0.0, 0.0, static_cast<double>(size.width - 1), static_cast<double>(size.height - 1)};
  Triangulation tri = triangulate(pts, border, kMergeTolerance);
  if (tri.vertices.size() != pts.size())
    throw DegenerateGeometry("build_frame_mesh: vertex set changed during triangulation");

  mesh.triangles = std::move(tri.triangles);
  mesh.adjacency = std::move(tri.adjacency);
  mesh.neighbors.assign(mesh.triangles.size(), {});
  for (const auto& adj : mesh.adjacency) {
    mesh.neighbors[static_cast<std::size_t>(adj.first)].push_back(adj.second);
    mesh.neighbors[static_cast<std::size_t>(adj.second)].push_back(adj.first);
  }
  for (auto& n : mesh.neighbors) std::sort(n.begin(), n.end());
  for (int i = 0; i < static_cast<int>(mesh.triangles.size()); ++i)
    (mesh.is_inner(i) ? mesh.inner : mesh.outer).push_back(i);
  return mesh;
}

FrameMesh build_frame_mesh(const TrajectorySet& ts, int t) {
  const auto features = frame_feature_set(ts, t);
  return build_frame_mesh(features, ts.frame_size(), t);
}

SimilarityCoords similarity_coords(Point2 v1, Point2 v2, Point2 v3) {
  const Point2 d = v3 - v2;
  const double len2 = squared_norm(d);
  if (len2 == 0.0) throw DegenerateGeometry("similarity_coords: coincident base vertices");
  const Point2 r = v1 - v2;
  return {dot(r, d) / len2, dot(r, rotate90(d)) / len2};
}

Point2 reconstruct_from_similarity(Point2 v2, Point2 v3, SimilarityCoords c) {
  const Point2 d = v3 - v2;
  return v2 + c.a * d + c.b * rotate90(d);
}

BarycentricWeights barycentric(Point2 p, Point2 v1, Point2 v2, Point2 v3) {
  const double area2 = signed_area2(v1, v2, v3);
  if (!(std::abs(area2) * 0.5 >= kAreaEpsilon)) throw DegenerateGeometry("barycentric: degenerate triangle");
  return {signed_area2(p, v2, v3) / area2, signed_area2(v1, p, v3) / area2, signed_area2(v1, v2, p) / area2};
}

int opposite_vertex(const TriangleIndices& tri, const std::array<int, 2>& shared) {
  for (int v : tri)
    if (v != shared[0] && v != shared[1]) return v;
  throw std::invalid_argument("opposite_vertex: edge is not part of the triangle");
}

void write_mesh_dump(std::ostream& out, const FrameMesh& mesh) {
  char buf[128];
  out << "frame " << mesh.frame << '\n';
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Point2 p = mesh.vertex(v);
    std::snprintf(buf, sizeof buf, "v %d %.17g %.17g", v, p.x, p.y);
    out << buf;
    if (mesh.is_control(v))
      out << " control\n";
    else
      out << " feature " << mesh.features[static_cast<std::size_t>(v)].id << '\n';
  }
  for (int i = 0; i < static_cast<int>(mesh.triangles.size()); ++i) {
    const auto& t = mesh.triangles[static_cast<std::size_t>(i)];
    out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << (mesh.is_inner(i) ? " inner\n" : " outer\n");
  }
}

}  // namespace meshstab

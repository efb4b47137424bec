#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "meshstab/delaunay.hpp"
#include "meshstab/geometry.hpp"
#include "meshstab/trajectory.hpp"

namespace meshstab {

inline constexpr int kControlPointsPerEdge = 10;
inline constexpr int kControlPointCount = 4 * kControlPointsPerEdge - 4;
inline constexpr double kAreaEpsilon = 1e-9;

/// 36 points evenly spaced along the frame border, 10 per edge with shared
/// corners, ordered clockwise on screen starting at (0, 0).
struct ControlPointSet {
  std::array<Point2, kControlPointCount> points{};
};

ControlPointSet make_control_points(int width, int height);

/// Triangulation of one frame over its feature points plus the border
/// control points.
///
/// Vertices 0 .. features.size()-1 are feature points in ascending
/// trajectory id; the next 36 are the control points in ControlPointSet
/// order. A triangle is inner when all three vertices are features and outer
/// otherwise.
struct FrameMesh {
  int frame = 0;
  std::vector<FrameFeature> features;
  ControlPointSet controls;
  std::vector<TriangleIndices> triangles;
  std::vector<int> inner;
  std::vector<int> outer;
  std::vector<TriangleAdjacency> adjacency;
  /// Per triangle, the indices of the triangles sharing an edge with it.
  std::vector<std::vector<int>> neighbors;
  /// Ids of trajectories alive at this frame that were merged away as
  /// near-duplicates of a lower id or a control point.
  std::vector<int> merged_ids;

  int feature_count() const noexcept { return static_cast<int>(features.size()); }
  int vertex_count() const noexcept { return feature_count() + kControlPointCount; }
  bool is_control(int v) const noexcept { return v >= feature_count(); }
  Point2 vertex(int v) const {
    return is_control(v) ? controls.points[static_cast<std::size_t>(v - feature_count())]
                         : features[static_cast<std::size_t>(v)].position;
  }
  bool is_inner(int tri) const;
  /// No inner triangle exists (K_t = 0).
  bool feature_starved() const noexcept { return inner.empty(); }
};

/// Builds the mesh of frame t. Feature points within 1e-6 px of a lower-id
/// feature or of a control point are dropped from the mesh.
FrameMesh build_frame_mesh(const TrajectorySet& ts, int t);

/// Mesh from explicit features (ascending id) on a W x H frame.
FrameMesh build_frame_mesh(std::span<const FrameFeature> features, FrameSize size, int frame = 0);

/// Position of v1 in the rotated local frame of the edge v2 -> v3:
/// v1 = v2 + a (v3 - v2) + b R90 (v3 - v2), R90 = [0 1; -1 0].
struct SimilarityCoords {
  double a = 0.0;
  double b = 0.0;
};

SimilarityCoords similarity_coords(Point2 v1, Point2 v2, Point2 v3);
Point2 reconstruct_from_similarity(Point2 v2, Point2 v3, SimilarityCoords c);

/// p = a v1 + b v2 + c v3 with a + b + c = 1; p may lie outside the triangle.
struct BarycentricWeights {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

BarycentricWeights barycentric(Point2 p, Point2 v1, Point2 v2, Point2 v3);

/// Vertex of `tri` that is not in `shared`.
int opposite_vertex(const TriangleIndices& tri, const std::array<int, 2>& shared);

/// Debug dump: vertex lines `v index x y feature|control [id]`, then
/// triangle lines `t i j k inner|outer`.
void write_mesh_dump(std::ostream& out, const FrameMesh& mesh);

}  // namespace meshstab

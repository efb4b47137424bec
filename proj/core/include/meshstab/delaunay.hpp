#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "meshstab/geometry.hpp"

namespace meshstab {

using TriangleIndices = std::array<int, 3>;

/// Two triangles sharing an edge. first < second; shared is sorted.
struct TriangleAdjacency {
  int first = 0;
  int second = 0;
  std::array<int, 2> shared{};
  friend bool operator==(const TriangleAdjacency&, const TriangleAdjacency&) = default;
};

struct Triangulation {
  /// Unique vertices: input points in input order after merging near
  /// duplicates, followed by any border corners that had to be added.
  std::vector<Point2> vertices;
  /// Vertex index of every input point.
  std::vector<int> input_to_vertex;
  /// Positively oriented (orient2d > 0) index triples, smallest index first,
  /// sorted lexicographically.
  std::vector<TriangleIndices> triangles;
  std::vector<TriangleAdjacency> adjacency;
};

/// Delaunay triangulation by incremental Bowyer-Watson insertion with exact
/// predicates. Points closer than `merge_tolerance` to an earlier point are
/// merged into it.
///
/// With a border rectangle every point must lie inside it, the four corners
/// are added when missing, and the result tiles the rectangle: the border
/// edges are mesh edges. Without a border the result covers the convex hull.
///
/// Throws DegenerateGeometry for fewer than 3 distinct points or when all
/// points are collinear; std::invalid_argument for points outside the border.
Triangulation triangulate(std::span<const Point2> points, const std::optional<Rect>& border = std::nullopt,
                          double merge_tolerance = 1e-6);

/// Pairs of triangles sharing exactly two vertices.
std::vector<TriangleAdjacency> build_adjacency(std::span<const TriangleIndices> triangles);

}  // namespace meshstab

#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "meshstab/image.hpp"
#include "meshstab/mesh.hpp"
#include "meshstab/stage2.hpp"
#include "meshstab/trajectory.hpp"

namespace meshstab {

/// x' = m[0] x + m[1] y + m[2],  y' = m[3] x + m[4] y + m[5].
struct AffineMap {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  Point2 apply(Point2 p) const { return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]}; }
  double determinant() const { return m[0] * m[4] - m[1] * m[3]; }
};

/// Unique affine map sending src[k] to dst[k]. Throws DegenerateGeometry when
/// src has area below kAreaEpsilon.
AffineMap triangle_affine(const std::array<Point2, 3>& src, const std::array<Point2, 3>& dst);

struct FrameWarp {
  int frame = 0;
  std::vector<Point2> original;
  std::vector<Point2> stabilized;
  std::vector<TriangleIndices> triangles;
  /// Original -> stabilized, one per triangle.
  std::vector<AffineMap> maps;
  /// Stabilized triangle has non-positive orientation.
  std::vector<char> flipped;

  int flipped_count() const;
};

struct WarpField {
  int frame_count = 0;
  FrameSize size;
  std::vector<FrameWarp> frames;

  int flipped_count() const;
};

FrameWarp build_frame_warp(const FrameMesh& mesh, std::span<const Point2> stabilized_features,
                           const FrameControls& controls);

WarpField build_warp_field(std::span<const FrameMesh> meshes, const TrajectorySet& stabilized,
                           std::span<const FrameControls> controls);

struct RenderStats {
  /// Output pixels not covered by any stabilized triangle.
  long long uncovered = 0;
  /// Covered pixels whose source position fell outside the input frame.
  long long outside_source = 0;
};

/// Inverse mapping: every output pixel is assigned to the lowest-index
/// stabilized triangle containing it (edges inclusive), mapped back through
/// that triangle's inverse affine and sampled bilinearly. Pixels with no
/// triangle or no source sample are 0.
std::vector<double> render_values(const GrayFrame& frame, const FrameWarp& warp, RenderStats* stats = nullptr);

/// render_values rounded to 8 bits.
GrayFrame render(const GrayFrame& frame, const FrameWarp& warp, RenderStats* stats = nullptr);

struct CropResult {
  Rect rect;
  /// No centered rectangle fits every frame; rect is the full frame.
  bool empty_intersection = false;
};

/// Largest rectangle centred on the frame centre with the frame's aspect
/// ratio that lies inside every frame's stabilized border polygon, by 32
/// bisection steps on the scale.
CropResult common_crop(const WarpField& field);

/// Pixels of `frame` inside `rect`, rounded inward to whole pixels.
GrayFrame crop(const GrayFrame& frame, const Rect& rect);

/// Text format: header `T W H`; per frame a line `frame t V K`, V lines
/// `ox oy sx sy` (original and stabilized vertex), then K lines
/// `m0 m1 m2 m3 m4 m5 i j k`.
void write_warp_field(std::ostream& out, const WarpField& field);
WarpField read_warp_field(std::istream& in);
void save_warp_field(const WarpField& field, const std::filesystem::path& path);
WarpField load_warp_field(const std::filesystem::path& path);

}  // namespace meshstab

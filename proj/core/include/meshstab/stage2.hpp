#pragma once

#include <array>
#include <span>
#include <vector>

#include "meshstab/mesh.hpp"
#include "meshstab/quadratic.hpp"
#include "meshstab/trajectory.hpp"

namespace meshstab {

struct StageTwoConfig {
  double gamma = 10.0;
  double epsilon = 20.0;
  /// Frames whose normal matrix has min/max eigenvalue ratio below this are
  /// treated as singular.
  double singular_ratio = 1e-12;
};

/// Stabilized position of every feature vertex of `mesh`, looked up by id
/// in the stage-1 output.
std::vector<Point2> stabilized_feature_positions(const FrameMesh& mesh, const TrajectorySet& stabilized);

/// Unknown layout: control point c occupies columns 2c (x) and 2c + 1 (y).
/// Feature vertices enter as fixed values from `features`.
void add_outer_intersim(QuadraticProblem& prob, const FrameMesh& mesh, std::span<const Point2> features,
                        double gamma);
/// For every outer triangle i and every neighbour j (inner or outer).
void add_outer_intrasim(QuadraticProblem& prob, const FrameMesh& mesh, std::span<const Point2> features,
                        double epsilon);

QuadraticProblem assemble_stage2_frame(const FrameMesh& mesh, std::span<const Point2> features,
                                       const StageTwoConfig& cfg);

struct FrameControls {
  std::array<Point2, kControlPointCount> points{};
  /// The frame system was singular and the original controls were kept.
  bool fallback = false;
};

FrameControls solve_stage2_frame(const FrameMesh& mesh, std::span<const Point2> features,
                                 const StageTwoConfig& cfg);

/// One entry per mesh, frames independent.
std::vector<FrameControls> solve_stage2(std::span<const FrameMesh> meshes, const TrajectorySet& stabilized,
                                        const StageTwoConfig& cfg);

}  // namespace meshstab

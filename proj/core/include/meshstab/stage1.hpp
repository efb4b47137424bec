#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "meshstab/mesh.hpp"
#include "meshstab/quadratic.hpp"
#include "meshstab/trajectory.hpp"
#include "meshstab/weights.hpp"

namespace meshstab {

struct StageOneConfig {
  double alpha = 20.0;
  double beta = 10.0;
  double gamma = 10.0;
  double epsilon = 20.0;
  /// Weight of the regularizer; the method fixes it at 1. Exposed so that
  /// all weights can be scaled together.
  double regularization = 1.0;
  TemporalWeightParams temporal;
  LsmParams lsm;
  SolverOptions solver;
  bool adaptive_temporal = true;
  bool adaptive_lsm = true;

  void validate() const;
};

/// Column layout of the stage-1 unknown vector: one (x, y) pair per stored
/// trajectory point, trajectories in ascending id, frames ascending.
class UnknownIndex {
 public:
  UnknownIndex() = default;
  explicit UnknownIndex(const TrajectorySet& ts);

  int unknowns() const noexcept { return 2 * points_; }
  /// Column of the x coordinate; y is the next column.
  int column(std::size_t trajectory_index, int t) const;
  int column_by_id(int id, int t) const;

  Eigen::VectorXd pack(const TrajectorySet& ts) const;
  TrajectorySet unpack(const TrajectorySet& shape, const Eigen::VectorXd& x) const;

 private:
  std::vector<int> offset_;
  std::vector<int> start_;
  std::vector<int> length_;
  std::unordered_map<int, std::size_t> by_id_;
  int points_ = 0;
};

/// A mesh vertex inside a residual: unknown columns (col, col + 1) when
/// col >= 0, otherwise the fixed position.
struct VertexRef {
  int col = -1;
  Point2 fixed;
};

/// w ||target - (v2 + a (v3 - v2) + b R90 (v3 - v2))||^2, one residual per axis.
void add_similarity_residual(QuadraticProblem& prob, const VertexRef& target, const VertexRef& v2,
                             const VertexRef& v3, SimilarityCoords c, double weight);

/// w ||target - (a v1 + b v2 + c v3)||^2, one residual per axis.
void add_barycentric_residual(QuadraticProblem& prob, const VertexRef& target, const VertexRef& v1,
                              const VertexRef& v2, const VertexRef& v3, BarycentricWeights bw, double weight);

void add_smooth1(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index,
                 const StageOneConfig& cfg);
void add_smooth2(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index,
                 const StageOneConfig& cfg);
/// Every vertex role of every inner triangle of every frame, weighted by
/// gamma times the LSM weight of the target vertex.
void add_intersim(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index,
                  std::span<const FrameMesh> meshes, const LsmTable& lsm, const StageOneConfig& cfg);
/// For each inner triangle i and each inner neighbour j, the opposite vertex
/// of i rebuilt in j's barycentric frame and vice versa.
void add_intrasim(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index,
                  std::span<const FrameMesh> meshes, const StageOneConfig& cfg);
void add_reg(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index, double weight = 1.0);

QuadraticProblem assemble_stage1(const TrajectorySet& ts, const UnknownIndex& index,
                                 std::span<const FrameMesh> meshes, const LsmTable& lsm,
                                 const StageOneConfig& cfg);

struct StageOneResult {
  TrajectorySet stabilized;
  SolveResult solve;
};

/// Builds the LSM table (or a uniform one when adaptive_lsm is off),
/// assembles and solves. `meshes` holds one mesh per frame.
StageOneResult stabilize_stage1(const TrajectorySet& ts, std::span<const FrameMesh> meshes,
                                const StageOneConfig& cfg);

}  // namespace meshstab

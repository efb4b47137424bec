#include "meshstab/stage1.hpp"

#include <cmath>
#include <stdexcept>

namespace meshstab {
namespace {

// One axis of a residual under construction.
struct AxisForm {
  std::vector<QuadraticProblem::Coefficient> coeffs;
  double constant = 0.0;

  void add(const VertexRef& v, int axis, double m) {
    if (m == 0.0) return;
    if (v.col >= 0)
      coeffs.emplace_back(v.col + axis, m);
    else
      constant += m * (axis == 0 ? v.fixed.x : v.fixed.y);
  }
};

VertexRef mesh_vertex_ref(const FrameMesh& mesh, const UnknownIndex& index, int v) {
  return {index.column_by_id(mesh.features[static_cast<std::size_t>(v)].id, mesh.frame), mesh.vertex(v)};
}

std::array<int, 2> shared_edge(const TriangleIndices& a, const TriangleIndices& b) {
  std::array<int, 2> out{};
  int n = 0;
  for (int u : a)
    for (int w : b)
      if (u == w && n < 2) out[static_cast<std::size_t>(n++)] = u;
  if (n != 2) throw std::logic_error("triangles are not adjacent");
  return out;
}

void check_nonnegative(double w, const char* name) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
}

}  // namespace

void StageOneConfig::validate() const {
  check_nonnegative(alpha, "alpha");
  check_nonnegative(beta, "beta");
  check_nonnegative(gamma, "gamma");
  check_nonnegative(epsilon, "epsilon");
  if (!(regularization > 0.0) || !std::isfinite(regularization))
    throw std::invalid_argument("regularization weight must be positive");
  if (!(temporal.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  lsm.validate();
  if (!(solver.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (solver.max_iterations < 0) throw std::invalid_argument("solver max iterations must be >= 0");
}

UnknownIndex::UnknownIndex(const TrajectorySet& ts) {
  for (const auto& tr : ts.trajectories()) {
    by_id_.emplace(tr.id, offset_.size());
    offset_.push_back(points_);
    start_.push_back(tr.start_frame);
    length_.push_back(tr.length());
    points_ += tr.length();
  }
}

int UnknownIndex::column(std::size_t trajectory_index, int t) const {
  const int k = t - start_.at(trajectory_index);
  if (k < 0 || k >= length_[trajectory_index]) throw std::out_of_range("UnknownIndex: frame outside trajectory");
  return 2 * (offset_[trajectory_index] + k);
}

int UnknownIndex::column_by_id(int id, int t) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw std::out_of_range("UnknownIndex: unknown trajectory id");
  return column(it->second, t);
}

Eigen::VectorXd UnknownIndex::pack(const TrajectorySet& ts) const {
  Eigen::VectorXd x(unknowns());
  Eigen::Index k = 0;
  for (const auto& tr : ts.trajectories())
    for (const Point2& p : tr.points) {
      x(k++) = p.x;
      x(k++) = p.y;
    }
  if (k != x.size()) throw std::invalid_argument("UnknownIndex::pack: trajectory set does not match the index");
  return x;
}

TrajectorySet UnknownIndex::unpack(const TrajectorySet& shape, const Eigen::VectorXd& x) const {
  if (x.size() != unknowns()) throw std::invalid_argument("UnknownIndex::unpack: vector has wrong size");
  std::vector<FeatureTrajectory> out(shape.trajectories().begin(), shape.trajectories().end());
  Eigen::Index k = 0;
  for (auto& tr : out)
    for (Point2& p : tr.points) {
      p.x = x(k++);
      p.y = x(k++);
    }
  return TrajectorySet::unchecked(std::move(out), shape.frame_count(), shape.frame_size());
}

void add_similarity_residual(QuadraticProblem& prob, const VertexRef& target, const VertexRef& v2,
                             const VertexRef& v3, SimilarityCoords c, double weight) {
  AxisForm rx, ry;
  rx.add(target, 0, 1.0);
  rx.add(v2, 0, -(1.0 - c.a));
  rx.add(v3, 0, -c.a);
  rx.add(v2, 1, c.b);
  rx.add(v3, 1, -c.b);

  ry.add(target, 1, 1.0);
  ry.add(v2, 1, -(1.0 - c.a));
  ry.add(v3, 1, -c.a);
  ry.add(v2, 0, -c.b);
  ry.add(v3, 0, c.b);

  prob.add_residual(rx.coeffs, rx.constant, weight);
  prob.add_residual(ry.coeffs, ry.constant, weight);
}

void add_barycentric_residual(QuadraticProblem& prob, const VertexRef& target, const VertexRef& v1,
                              const VertexRef& v2, const VertexRef& v3, BarycentricWeights bw, double weight) {
  for (int axis = 0; axis < 2; ++axis) {
    AxisForm r;
    r.add(target, axis, 1.0);
    r.add(v1, axis, -bw.a);
    r.add(v2, axis, -bw.b);
    r.add(v3, axis, -bw.c);
    prob.add_residual(r.coeffs, r.constant, weight);
  }
}

void add_smooth1(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index,
                 const StageOneConfig& cfg) {
  const auto trs = ts.trajectories();
  for (std::size_t i = 0; i < trs.size(); ++i) {
    const auto& tr = trs[i];
    for (int t = tr.start_frame + 1; t <= tr.end_frame(); ++t) {
      const int cur = index.column(i, t), prev = index.column(i, t - 1);
      const Point2 d = tr.at(t) - tr.at(t - 1);
      for (int axis = 0; axis < 2; ++axis) {
        double w = cfg.alpha;
        if (cfg.adaptive_temporal) w *= temporal_weight(std::abs(axis == 0 ? d.x : d.y), cfg.temporal.sigma);
        const QuadraticProblem::Coefficient row[] = {{cur + axis, 1.0}, {prev + axis, -1.0}};
        prob.add_residual(row, 0.0, w);
      }
    }
  }
}

void add_smooth2(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index,
                 const StageOneConfig& cfg) {
  const auto trs = ts.trajectories();
  for (std::size_t i = 0; i < trs.size(); ++i) {
    const auto& tr = trs[i];
    for (int t = tr.start_frame + 1; t < tr.end_frame(); ++t) {
      const int prev = index.column(i, t - 1), cur = index.column(i, t), next = index.column(i, t + 1);
      for (int axis = 0; axis < 2; ++axis) {
        const QuadraticProblem::Coefficient row[] = {{next + axis, 1.0}, {cur + axis, -2.0}, {prev + axis, 1.0}};
        prob.add_residual(row, 0.0, cfg.beta);
      }
    }
  }
}

void add_intersim(QuadraticProblem& prob, const TrajectorySet&, const UnknownIndex& index,
                  std::span<const FrameMesh> meshes, const LsmTable& lsm, const StageOneConfig& cfg) {
  for (const FrameMesh& mesh : meshes) {
    for (int tri : mesh.inner) {
      const auto& v = mesh.triangles[static_cast<std::size_t>(tri)];
      for (int r = 0; r < 3; ++r) {
        const int t1 = v[static_cast<std::size_t>(r)], t2 = v[static_cast<std::size_t>((r + 1) % 3)],
                  t3 = v[static_cast<std::size_t>((r + 2) % 3)];
        const SimilarityCoords c = similarity_coords(mesh.vertex(t1), mesh.vertex(t2), mesh.vertex(t3));
        const double w = cfg.gamma * lsm.at(mesh.frame, mesh.features[static_cast<std::size_t>(t1)].id);
        add_similarity_residual(prob, mesh_vertex_ref(mesh, index, t1), mesh_vertex_ref(mesh, index, t2),
                                mesh_vertex_ref(mesh, index, t3), c, w);
      }
    }
  }
}

void add_intrasim(QuadraticProblem& prob, const TrajectorySet&, const UnknownIndex& index,
                  std::span<const FrameMesh> meshes, const StageOneConfig& cfg) {
  for (const FrameMesh& mesh : meshes) {
    const auto ref = [&](int v) { return mesh_vertex_ref(mesh, index, v); };
    for (int i : mesh.inner) {
      const auto& ti = mesh.triangles[static_cast<std::size_t>(i)];
      for (int j : mesh.neighbors[static_cast<std::size_t>(i)]) {
        if (!mesh.is_inner(j)) continue;
        const auto& tj = mesh.triangles[static_cast<std::size_t>(j)];
        const auto edge = shared_edge(ti, tj);
        const int oi = opposite_vertex(ti, edge), oj = opposite_vertex(tj, edge);
        const auto wi = barycentric(mesh.vertex(oi), mesh.vertex(tj[0]), mesh.vertex(tj[1]), mesh.vertex(tj[2]));
        add_barycentric_residual(prob, ref(oi), ref(tj[0]), ref(tj[1]), ref(tj[2]), wi, cfg.epsilon);
        const auto wj = barycentric(mesh.vertex(oj), mesh.vertex(ti[0]), mesh.vertex(ti[1]), mesh.vertex(ti[2]));
        add_barycentric_residual(prob, ref(oj), ref(ti[0]), ref(ti[1]), ref(ti[2]), wj, cfg.epsilon);
      }
    }
  }
}

void add_reg(QuadraticProblem& prob, const TrajectorySet& ts, const UnknownIndex& index, double weight) {
  const auto trs = ts.trajectories();
  for (std::size_t i = 0; i < trs.size(); ++i)
    for (int t = trs[i].start_frame; t <= trs[i].end_frame(); ++t) {
      const int col = index.column(i, t);
      const Point2 p = trs[i].at(t);
      const QuadraticProblem::Coefficient rx[] = {{col, 1.0}};
      const QuadraticProblem::Coefficient ry[] = {{col + 1, 1.0}};
      prob.add_residual(rx, -p.x, weight);
      prob.add_residual(ry, -p.y, weight);
    }
}

QuadraticProblem assemble_stage1(const TrajectorySet& ts, const UnknownIndex& index,
                                 std::span<const FrameMesh> meshes, const LsmTable& lsm,
                                 const StageOneConfig& cfg) {
  QuadraticProblem prob(index.unknowns());
  add_smooth1(prob, ts, index, cfg);
  add_smooth2(prob, ts, index, cfg);
  add_intersim(prob, ts, index, meshes, lsm, cfg);
  add_intrasim(prob, ts, index, meshes, cfg);
  add_reg(prob, ts, index, cfg.regularization);
  return prob;
}

StageOneResult stabilize_stage1(const TrajectorySet& ts, std::span<const FrameMesh> meshes,
                                const StageOneConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(meshes.size()) != ts.frame_count())
    throw std::invalid_argument("stabilize_stage1: need one mesh per frame");
  const UnknownIndex index(ts);
  const LsmTable lsm = cfg.adaptive_lsm ? LsmTable(ts, cfg.lsm) : LsmTable::uniform(ts);
  const QuadraticProblem prob = assemble_stage1(ts, index, meshes, lsm, cfg);
  SolveResult sr = solve(prob, cfg.solver, index.pack(ts));
  TrajectorySet out = index.unpack(ts, sr.x);
  return {std::move(out), std::move(sr)};
}

}  // namespace meshstab

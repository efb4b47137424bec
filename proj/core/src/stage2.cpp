#include "meshstab/stage2.hpp"

#include <stdexcept>

#include <Eigen/Dense>

#include "meshstab/stage1.hpp"

namespace meshstab {
namespace {

VertexRef frame_ref(const FrameMesh& mesh, std::span<const Point2> features, int v) {
  if (mesh.is_control(v)) return {2 * (v - mesh.feature_count()), {}};
  return {-1, features[static_cast<std::size_t>(v)]};
}

void check_features(const FrameMesh& mesh, std::span<const Point2> features) {
  if (static_cast<int>(features.size()) != mesh.feature_count())
    throw std::invalid_argument("stage 2: one stabilized position per feature vertex required");
}

}  // namespace

std::vector<Point2> stabilized_feature_positions(const FrameMesh& mesh, const TrajectorySet& stabilized) {
  std::vector<Point2> out;
  out.reserve(mesh.features.size());
  for (const auto& f : mesh.features) out.push_back(stabilized.by_id(f.id).at(mesh.frame));
  return out;
}

void add_outer_intersim(QuadraticProblem& prob, const FrameMesh& mesh, std::span<const Point2> features,
                        double gamma) {
  check_features(mesh, features);
  for (int tri : mesh.outer) {
    const auto& v = mesh.triangles[static_cast<std::size_t>(tri)];
    for (int r = 0; r < 3; ++r) {
      const int t1 = v[static_cast<std::size_t>(r)], t2 = v[static_cast<std::size_t>((r + 1) % 3)],
                t3 = v[static_cast<std::size_t>((r + 2) % 3)];
      const SimilarityCoords c = similarity_coords(mesh.vertex(t1), mesh.vertex(t2), mesh.vertex(t3));
      add_similarity_residual(prob, frame_ref(mesh, features, t1), frame_ref(mesh, features, t2),
                              frame_ref(mesh, features, t3), c, gamma);
    }
  }
}

void add_outer_intrasim(QuadraticProblem& prob, const FrameMesh& mesh, std::span<const Point2> features,
                        double epsilon) {
  check_features(mesh, features);
  const auto ref = [&](int v) { return frame_ref(mesh, features, v); };
  for (const auto& adj : mesh.adjacency) {
    const int a = adj.first, b = adj.second;
    const bool a_outer = !mesh.is_inner(a), b_outer = !mesh.is_inner(b);
    // The sum runs over outer i and every neighbour j, so an outer-outer
    // pair is visited from both sides.
    const int visits = static_cast<int>(a_outer) + static_cast<int>(b_outer);
    if (visits == 0) continue;
    const auto& ta = mesh.triangles[static_cast<std::size_t>(a)];
    const auto& tb = mesh.triangles[static_cast<std::size_t>(b)];
    const int oa = opposite_vertex(ta, adj.shared), ob = opposite_vertex(tb, adj.shared);
    const auto wa = barycentric(mesh.vertex(oa), mesh.vertex(tb[0]), mesh.vertex(tb[1]), mesh.vertex(tb[2]));
    const auto wb = barycentric(mesh.vertex(ob), mesh.vertex(ta[0]), mesh.vertex(ta[1]), mesh.vertex(ta[2]));
    const double w = epsilon * visits;
    add_barycentric_residual(prob, ref(oa), ref(tb[0]), ref(tb[1]), ref(tb[2]), wa, w);
    add_barycentric_residual(prob, ref(ob), ref(ta[0]), ref(ta[1]), ref(ta[2]), wb, w);
  }
}

QuadraticProblem assemble_stage2_frame(const FrameMesh& mesh, std::span<const Point2> features,
                                       const StageTwoConfig& cfg) {
  QuadraticProblem prob(2 * kControlPointCount);
  add_outer_intersim(prob, mesh, features, cfg.gamma);
  add_outer_intrasim(prob, mesh, features, cfg.epsilon);
  return prob;
}

FrameControls solve_stage2_frame(const FrameMesh& mesh, std::span<const Point2> features,
                                 const StageTwoConfig& cfg) {
  FrameControls out;
  out.points = mesh.controls.points;
  const QuadraticProblem prob = assemble_stage2_frame(mesh, features, cfg);
  const Eigen::MatrixXd h(prob.matrix());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo < cfg.singular_ratio * hi) {
    out.fallback = true;
    return out;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    out.fallback = true;
    return out;
  }
  const Eigen::VectorXd x = llt.solve(prob.rhs());
  for (int c = 0; c < kControlPointCount; ++c) out.points[static_cast<std::size_t>(c)] = {x(2 * c), x(2 * c + 1)};
  return out;
}

std::vector<FrameControls> solve_stage2(std::span<const FrameMesh> meshes, const TrajectorySet& stabilized,
                                        const StageTwoConfig& cfg) {
  std::vector<FrameControls> out;
  out.reserve(meshes.size());
  for (const FrameMesh& mesh : meshes) {
    const auto features = stabilized_feature_positions(mesh, stabilized);
    out.push_back(solve_stage2_frame(mesh, features, cfg));
  }
  return out;
}

}  // namespace meshstab

#include "meshstab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

namespace meshstab {
namespace {

constexpr double kConditionLimit = 1e12;
constexpr int kMinNeighbors = 4;

}  // namespace

void LsmParams::validate() const {
  if (k < kMinNeighbors) throw std::invalid_argument("lsm.k must be at least 4");
  if (!(tau > 0.0)) throw std::invalid_argument("lsm.tau must be positive");
  if (!(clamp_low < clamp_high)) throw std::invalid_argument("lsm clamp range is empty");
}

double temporal_weight(double d, double sigma) {
  const double u = (d - sigma) / sigma;
  return std::exp(-(u * u * u));
}

std::vector<int> knn_neighbors(std::span<const FrameFeature> features, int i, int k) {
  const auto self = std::find_if(features.begin(), features.end(), [i](const FrameFeature& f) { return f.id == i; });
  if (self == features.end()) throw std::invalid_argument("knn_neighbors: id not present in the frame");
  struct Candidate {
    double dist2;
    int id;
  };
  std::vector<Candidate> others;
  others.reserve(features.size());
  for (const auto& f : features)
    if (f.id != i) others.push_back({squared_norm(f.position - self->position), f.id});
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), others.size());
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take), others.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
                    });
  std::vector<int> out{i};
  for (std::size_t j = 0; j < take; ++j) out.push_back(others[j].id);
  return out;
}

HomographyFit fit_local_homography(std::span<const Point2> current, std::span<const Point2> previous) {
  if (current.size() != previous.size()) throw std::invalid_argument("fit_local_homography: size mismatch");
  HomographyFit fit;
  const auto n = static_cast<Eigen::Index>(current.size());
  if (n < 4) {
    fit.degenerate = true;
    return fit;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 8);
  Eigen::VectorXd b(2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Point2 c = current[static_cast<std::size_t>(j)];
    const Point2 p = previous[static_cast<std::size_t>(j)];
    a.row(2 * j) << c.x, c.y, 1.0, 0.0, 0.0, 0.0, -p.x * c.x, -p.x * c.y;
    a.row(2 * j + 1) << 0.0, 0.0, 0.0, c.x, c.y, 1.0, -p.y * c.x, -p.y * c.y;
    b(2 * j) = p.x;
    b(2 * j + 1) = p.y;
  }

  Eigen::VectorXd scale = a.colwise().norm().transpose();
  if ((scale.array() == 0.0).any()) {
    fit.degenerate = true;
    return fit;
  }
  scale = scale.cwiseInverse();
  const Eigen::MatrixXd as = a * scale.asDiagonal();
  const Eigen::MatrixXd normal = as.transpose() * as;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit) {
    fit.degenerate = true;
    return fit;
  }
  const Eigen::VectorXd y = normal.partialPivLu().solve(as.transpose() * b);
  const Eigen::VectorXd h = scale.cwiseProduct(y);
  for (int j = 0; j < 8; ++j) fit.h[static_cast<std::size_t>(j)] = h(j);
  fit.residual = (a * h - b).squaredNorm();
  if (!std::isfinite(fit.residual)) fit.degenerate = true;
  return fit;
}

double lsm_weight(const TrajectorySet& ts, int t, int id, const LsmParams& params) {
  const FeatureTrajectory& self = ts.by_id(id);
  if (!self.alive_at(t) || t == self.start_frame) return 1.0;

  std::vector<FrameFeature> candidates;
  for (std::size_t idx : ts.alive_at(t)) {
    const auto& tr = ts.trajectories()[idx];
    if (tr.alive_at(t - 1)) candidates.push_back({tr.id, tr.at(t)});
  }
  const auto ids = knn_neighbors(candidates, id, params.k);
  const int k = static_cast<int>(ids.size()) - 1;
  if (k < kMinNeighbors) return 1.0;

  std::vector<Point2> cur, prev;
  double spread = 0.0;
  for (int nid : ids) {
    const auto& tr = ts.by_id(nid);
    cur.push_back(tr.at(t));
    prev.push_back(tr.at(t - 1));
    spread += distance(self.at(t), tr.at(t));
  }
  const HomographyFit fit = fit_local_homography(cur, prev);
  if (fit.degenerate) return 1.0;

  const FrameSize size = ts.frame_size();
  const double rho = (size.width / params.tau + size.height / params.tau) / 2.0;
  const double theta = spread / (k * rho);
  return std::clamp(theta * fit.residual, params.clamp_low, params.clamp_high);
}

LsmTable::LsmTable(const TrajectorySet& ts, const LsmParams& params) : LsmTable(uniform(ts)) {
  params.validate();
  const auto trs = ts.trajectories();
  for (std::size_t i = 0; i < trs.size(); ++i)
    for (int t = trs[i].start_frame; t <= trs[i].end_frame(); ++t)
      weights_[i][static_cast<std::size_t>(t - trs[i].start_frame)] = lsm_weight(ts, t, trs[i].id, params);
}

LsmTable LsmTable::uniform(const TrajectorySet& ts) {
  LsmTable table;
  table.frame_count_ = ts.frame_count();
  for (const auto& tr : ts.trajectories()) {
    table.index_.emplace(tr.id, table.ids_.size());
    table.ids_.push_back(tr.id);
    table.starts_.push_back(tr.start_frame);
    table.weights_.emplace_back(tr.points.size(), 1.0);
  }
  return table;
}

double LsmTable::at(int t, int id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("LsmTable: unknown trajectory id");
  const auto& w = weights_[it->second];
  const int offset = t - starts_[it->second];
  if (offset < 0 || offset >= static_cast<int>(w.size())) throw std::out_of_range("LsmTable: trajectory not alive at frame");
  return w[static_cast<std::size_t>(offset)];
}

std::size_t LsmTable::size() const noexcept {
  std::size_t n = 0;
  for (const auto& w : weights_) n += w.size();
  return n;
}

void LsmTable::write(std::ostream& out) const {
  char buf[96];
  for (int t = 0; t < frame_count_; ++t)
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      const int offset = t - starts_[i];
      if (offset < 0 || offset >= static_cast<int>(weights_[i].size())) continue;
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", t, ids_[i], weights_[i][static_cast<std::size_t>(offset)]);
      out << buf;
    }
}

}  // namespace meshstab

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace meshstab {

/// Sum of weighted squared affine residuals  sum_r w_r (a_r . x + o_r)^2,
/// equivalently x'Hx - 2 b'x + c with H = A'WA, b = -A'Wo, c = o'Wo.
class QuadraticProblem {
 public:
  using Coefficient = std::pair<int, double>;

  explicit QuadraticProblem(int unknowns = 0) : n_(unknowns) {}

  int unknowns() const noexcept { return n_; }
  std::size_t residual_count() const noexcept { return weights_.size(); }

  /// Adds w (sum_k coeffs[k].second * x[coeffs[k].first] + offset)^2.
  /// Requires w >= 0 and valid column indices.
  void add_residual(std::span<const Coefficient> coeffs, double offset, double weight);

  /// Evaluates the residual sum directly.
  double objective(const Eigen::VectorXd& x) const;
  /// 2Hx - 2b.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  Eigen::SparseMatrix<double> matrix() const;
  Eigen::VectorXd rhs() const;
  double constant() const;

  /// Coordinate text dump: `n nnz`, then `row col value` for every stored
  /// entry of H, then `rhs` followed by one value per line.
  void write(std::ostream& out) const;

 private:
  int n_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<int> cols_;
  std::vector<double> coefs_;
  std::vector<double> offsets_;
  std::vector<double> weights_;
};

struct SolverOptions {
  double tolerance = 1e-10;
  /// 0 selects 10 x unknowns.
  int max_iterations = 0;
  int dense_threshold = 2000;
  bool force_iterative = false;
};

struct SolveResult {
  Eigen::VectorXd x;
  int iterations = 0;
  /// ||Hx - b|| / ||b|| (absolute when b = 0).
  double relative_residual = 0.0;
  bool dense = false;
};

/// Minimises the problem. Dense Cholesky below the dense threshold, Jacobi
/// preconditioned conjugate gradient otherwise. Throws SolverError when the
/// matrix is not positive definite or CG does not converge.
SolveResult solve(const QuadraticProblem& problem, const SolverOptions& options = {},
                  const std::optional<Eigen::VectorXd>& initial_guess = std::nullopt);

}  // namespace meshstab

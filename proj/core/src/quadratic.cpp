#include "meshstab/quadratic.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include "meshstab/errors.hpp"

namespace meshstab {

void QuadraticProblem::add_residual(std::span<const Coefficient> coeffs, double offset, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("add_residual: invalid weight");
  if (!std::isfinite(offset)) throw std::invalid_argument("add_residual: non-finite offset");
  for (const auto& [col, value] : coeffs) {
    if (col < 0 || col >= n_) throw std::out_of_range("add_residual: column out of range");
    if (!std::isfinite(value)) throw std::invalid_argument("add_residual: non-finite coefficient");
    cols_.push_back(col);
    coefs_.push_back(value);
  }
  row_start_.push_back(cols_.size());
  offsets_.push_back(offset);
  weights_.push_back(weight);
}

double QuadraticProblem::objective(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (std::size_t r = 0; r < weights_.size(); ++r) {
    double v = offsets_[r];
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) v += coefs_[k] * x(cols_[k]);
    sum += weights_[r] * v * v;
  }
  return sum;
}

Eigen::VectorXd QuadraticProblem::gradient(const Eigen::VectorXd& x) const {
  return 2.0 * (matrix() * x - rhs());
}

Eigen::SparseMatrix<double> QuadraticProblem::matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < weights_.size(); ++r) {
    const double w = weights_[r];
    if (w == 0.0) continue;
    for (std::size_t p = row_start_[r]; p < row_start_[r + 1]; ++p)
      for (std::size_t q = row_start_[r]; q < row_start_[r + 1]; ++q)
        triplets.emplace_back(cols_[p], cols_[q], w * coefs_[p] * coefs_[q]);
  }
  Eigen::SparseMatrix<double> h(n_, n_);
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

Eigen::VectorXd QuadraticProblem::rhs() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_);
  for (std::size_t r = 0; r < weights_.size(); ++r)
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k)
      b(cols_[k]) -= weights_[r] * offsets_[r] * coefs_[k];
  return b;
}

double QuadraticProblem::constant() const {
  double c = 0.0;
  for (std::size_t r = 0; r < weights_.size(); ++r) c += weights_[r] * offsets_[r] * offsets_[r];
  return c;
}

void QuadraticProblem::write(std::ostream& out) const {
  const Eigen::SparseMatrix<double> h = matrix();
  const Eigen::VectorXd b = rhs();
  char buf[96];
  out << n_ << ' ' << h.nonZeros() << '\n';
  for (int k = 0; k < h.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(h, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value());
      out << buf;
    }
  out << "rhs\n";
  for (int i = 0; i < n_; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", b(i));
    out << buf;
  }
}

SolveResult solve(const QuadraticProblem& problem, const SolverOptions& options,
                  const std::optional<Eigen::VectorXd>& initial_guess) {
  const int n = problem.unknowns();
  SolveResult result;
  const Eigen::SparseMatrix<double> h = problem.matrix();
  const Eigen::VectorXd b = problem.rhs();
  const double bnorm = b.norm();
  const auto relative = [&](const Eigen::VectorXd& x) {
    const double r = (h * x - b).norm();
    return bnorm > 0.0 ? r / bnorm : r;
  };
  if (n == 0) {
    result.x = Eigen::VectorXd(0);
    return result;
  }

  if (!options.force_iterative && n < options.dense_threshold) {
    const Eigen::MatrixXd dense(h);
    const Eigen::LLT<Eigen::MatrixXd> llt(dense);
    if (llt.info() != Eigen::Success) throw SolverError("matrix is not positive definite", NAN);
    result.x = llt.solve(b);
    result.dense = true;
    result.relative_residual = relative(result.x);
    return result;
  }

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  // CG stops on its recursively updated residual, which drifts from the
  // true one; restart from the iterate until the true residual is met.
  cg.setTolerance(0.5 * options.tolerance);
  const int budget = options.max_iterations > 0 ? options.max_iterations : 10 * n;
  cg.compute(h);
  if (cg.info() != Eigen::Success) throw SolverError("preconditioner setup failed", NAN);
  if (initial_guess && initial_guess->size() != n) throw std::invalid_argument("solve: initial guess has wrong size");
  result.x = initial_guess ? *initial_guess : Eigen::VectorXd::Zero(n);
  for (int round = 0; round < 4; ++round) {
    cg.setMaxIterations(budget - result.iterations);
    result.x = cg.solveWithGuess(b, Eigen::VectorXd(result.x));
    result.iterations += static_cast<int>(cg.iterations());
    result.relative_residual = relative(result.x);
    if (!result.x.allFinite()) break;
    if (result.relative_residual <= options.tolerance || result.iterations >= budget) break;
  }
  if (!(result.relative_residual <= options.tolerance) || !result.x.allFinite())
    throw SolverError("conjugate gradient did not converge", result.relative_residual);
  return result;
}

}  // namespace meshstab

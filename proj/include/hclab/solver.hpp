#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <memory>
#include <string>

namespace hclab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SolverOptions {
  /// Exact factorization up to this many unknowns, preconditioned CG beyond.
  std::size_t direct_threshold = 160000;  // 20^4
  double cg_tolerance = 1e-10;
  int cg_max_iterations = 200000;
  /// Force CG even below the threshold (used to cross-check the two paths).
  bool force_iterative = false;
};

struct SolveStats {
  bool direct = true;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solver for a sparse symmetric positive-definite matrix.
///
/// The direct path factors P A P^T = L L^T once; solves and Gaussian sampling
/// reuse the factor. The iterative path is CG with a Jacobi preconditioner.
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& a, const SolverOptions& options);
  ~SpdSolver();
  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;

  std::size_t size() const;
  bool has_factor() const;
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// P^T L^{-T} Z, whose columns have covariance A^{-1} when Z has i.i.d.
  /// standard normal entries. Throws SolverError without a factor.
  Matrix correlate(const Matrix& z) const;
  /// Statistics of the most recent solve.
  SolveStats last_stats() const;
  /// Number of stored non-zeros of the factor (0 for the iterative path).
  std::size_t factor_nonzeros() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Name and version of the exact factorization backend.
std::string direct_backend();

}  // namespace hclab

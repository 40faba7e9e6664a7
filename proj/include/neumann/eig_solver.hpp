#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "neumann/errors.hpp"
#include "neumann/fem_assembly.hpp"

namespace neumann {

enum class Preconditioner {
  /// diag(M + delta K)^{-1}
  Jacobi,
  /// sparse LDL^T of M + delta K
  Factorized,
};

enum class SolverPath { Dense, Lobpcg, BlockKrylov };

struct EigOptions {
  int count = 5;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  Preconditioner preconditioner = Preconditioner::Factorized;
  int max_iters = 5000;
  /// LOBPCG is declared stalled when the worst wanted residual has not halved
  /// over this many iterations.
  int stall_window = 50;
  /// Extra block columns carried along but not reported.
  int guard = 2;
  /// Seed the block with the constant vector (exact kernel of M for densities).
  bool include_constant = true;
  /// Problems up to this size, or with count >= n/4, go to the dense solver.
  int dense_threshold = 200;
  /// Warm start block (columns), e.g. eigenvectors of a nearby density.
  std::optional<Eigen::MatrixXd> initial;
  /// Skip LOBPCG and use the shift-invert block Krylov path directly.
  bool force_block_krylov = false;
};

struct EigenResult {
  /// ascending
  std::vector<double> eigenvalues;
  /// K-orthonormal columns
  Eigen::MatrixXd eigenvectors;
  /// ||M u - mu K u|| / ||K u||
  std::vector<double> residuals;
  int iterations = 0;
  SolverPath path = SolverPath::Dense;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : Error(what), best_residuals_(std::move(best_residuals)) {}
  const std::vector<double>& best_residuals() const { return best_residuals_; }

 private:
  std::vector<double> best_residuals_;
};

/// `count` algebraically smallest eigenpairs of M u = mu K u.
EigenResult solve_smallest(const SparseSymSystem& system, int count, double tol = 1e-9);
EigenResult solve_smallest(const SparseMatrix& stiffness, const SparseMatrix& mass,
                           const EigOptions& options);

/// Dense generalized solve of the full spectrum; reference path for small
/// problems and for tests.
EigenResult solve_dense(const SparseMatrix& stiffness, const SparseMatrix& mass, int count);

}  // namespace neumann

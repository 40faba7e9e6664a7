#pragma once

#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "neumann/surface_mesh.hpp"

namespace neumann {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Generalized eigenproblem M u = mu K u for one density.
///
///   M[i][j] = int (rho + eps)   grad phi_i . grad phi_j
///   K[i][j] = int (rho + eps^2) phi_i phi_j
///   g[l]    = int phi_l
struct SparseSymSystem {
  SparseMatrix stiffness;
  SparseMatrix mass;
  Eigen::VectorXd mass_vector;
  double epsilon = 0.0;

  int dimension() const { return static_cast<int>(stiffness.rows()); }
};

/// P1 assembly with the density interpolated on the same hat functions.
/// Mass terms use the three-edge-midpoint rule.
SparseSymSystem assemble_system(const SurfaceMesh& mesh, const DensityField& rho, double epsilon);

/// Plain stiffness and mass matrices (unit coefficient, no regularization).
SparseSymSystem assemble_plain(const SurfaceMesh& mesh);

/// g[l] = int phi_l; sums to total_area(mesh).
Eigen::VectorXd mass_vector(const SurfaceMesh& mesh);

/// d mu / d rho_l for every vertex l, accumulated triangle by triangle:
///   [u^T (dM_l - mu dK_l) u] / (u^T K u).
/// Throws StaleEigenpairError when ||M u - mu K u|| > residual_tol * ||K u||.
Eigen::VectorXd eigenvalue_gradient(const SurfaceMesh& mesh, const SparseSymSystem& system,
                                    double mu, const Eigen::VectorXd& u,
                                    double residual_tol = 1e-6);

Eigen::VectorXd eigenvalue_gradient(const SurfaceMesh& mesh, const DensityField& rho,
                                    double epsilon, double mu, const Eigen::VectorXd& u,
                                    double residual_tol = 1e-6);

/// Gradient without the residual check; used when the caller already holds a
/// verified eigenpair.
Eigen::VectorXd eigenvalue_gradient_unchecked(const SurfaceMesh& mesh, double mu,
                                              const Eigen::VectorXd& u, double u_k_u);

/// ||M u - mu K u|| / ||K u||.
double relative_residual(const SparseSymSystem& system, double mu, const Eigen::VectorXd& u);

}  // namespace neumann

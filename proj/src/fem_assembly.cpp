#include "neumann/fem_assembly.hpp"

#include <string>

#include "neumann/errors.hpp"

namespace neumann {

namespace {

SparseMatrix make_pattern_matrix(const SurfaceMesh& mesh) {
  const SparsityPattern& pat = mesh.pattern();
  const int n = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(pat.columns.size());
  for (int r = 0; r < n; ++r)
    for (int s = pat.row_start[r]; s < pat.row_start[r + 1]; ++s)
      entries.emplace_back(r, pat.columns[s], 0.0);
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  return a;
}

// Coefficients are (rho + stiff_shift) and (rho + mass_shift); rho may be
// empty, meaning zero.
SparseSymSystem assemble(const SurfaceMesh& mesh, std::span<const double> rho,
                         double stiff_shift, double mass_shift) {
  SparseSymSystem sys;
  sys.stiffness = make_pattern_matrix(mesh);
  sys.mass = sys.stiffness;
  sys.mass_vector = Eigen::VectorXd::Zero(mesh.num_vertices());
  double* mv = sys.stiffness.valuePtr();
  double* kv = sys.mass.valuePtr();
  const auto& slots = mesh.pattern().triangle_slots;

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const double area = mesh.triangle_area(t);
    const auto& grad = mesh.basis_gradients(t);
    std::array<double, 3> r{0.0, 0.0, 0.0};
    if (!rho.empty()) r = {rho[tri[0]], rho[tri[1]], rho[tri[2]]};
    const double mean = (r[0] + r[1] + r[2]) / 3.0;
    // density at the midpoint opposite to local vertex i
    const std::array<double, 3> mid{0.5 * (r[1] + r[2]), 0.5 * (r[2] + r[0]),
                                    0.5 * (r[0] + r[1])};
    const double sum_mid = mid[0] + mid[1] + mid[2];
    for (int i = 0; i < 3; ++i) {
      sys.mass_vector[tri[i]] += area / 3.0;
      for (int j = 0; j < 3; ++j) {
        const int slot = slots[t][3 * i + j];
        mv[slot] += area * (mean + stiff_shift) * grad[i].dot(grad[j]);
        double k;
        if (i == j) {
          // midpoints adjacent to vertex i are those not opposite to it
          k = area / 12.0 * (sum_mid - mid[i] + 2.0 * mass_shift);
        } else {
          const int opposite = 3 - i - j;
          k = area / 12.0 * (mid[opposite] + mass_shift);
        }
        kv[slot] += k;
      }
    }
  }
  return sys;
}

}  // namespace

SparseSymSystem assemble_system(const SurfaceMesh& mesh, const DensityField& rho, double epsilon) {
  if (rho.mesh_id() != mesh.id() || rho.size() != mesh.num_vertices()) {
    throw StructuralError("density is not defined on this mesh");
  }
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  SparseSymSystem sys = assemble(mesh, rho.values(), epsilon, epsilon * epsilon);
  sys.epsilon = epsilon;
  return sys;
}

SparseSymSystem assemble_plain(const SurfaceMesh& mesh) {
  SparseSymSystem sys = assemble(mesh, {}, 1.0, 1.0);
  sys.epsilon = 0.0;
  return sys;
}

Eigen::VectorXd mass_vector(const SurfaceMesh& mesh) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangle(t)) g[v] += mesh.triangle_area(t) / 3.0;
  return g;
}

double relative_residual(const SparseSymSystem& system, double mu, const Eigen::VectorXd& u) {
  const Eigen::VectorXd ku = system.mass * u;
  const Eigen::VectorXd r = system.stiffness * u - mu * ku;
  return r.norm() / ku.norm();
}

Eigen::VectorXd eigenvalue_gradient_unchecked(const SurfaceMesh& mesh, double mu,
                                              const Eigen::VectorXd& u, double u_k_u) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const double area = mesh.triangle_area(t);
    const auto& g = mesh.basis_gradients(t);
    const Vec3 grad_u = u[tri[0]] * g[0] + u[tri[1]] * g[1] + u[tri[2]] * g[2];
    const double energy = area / 3.0 * grad_u.squaredNorm();
    // u at the midpoint opposite to local vertex i
    const std::array<double, 3> mid{0.5 * (u[tri[1]] + u[tri[2]]),
                                    0.5 * (u[tri[2]] + u[tri[0]]),
                                    0.5 * (u[tri[0]] + u[tri[1]])};
    const std::array<double, 3> mid2{mid[0] * mid[0], mid[1] * mid[1], mid[2] * mid[2]};
    const double sum_mid2 = mid2[0] + mid2[1] + mid2[2];
    for (int l = 0; l < 3; ++l) {
      // hat l is 1/2 at the two midpoints adjacent to l and 0 at the opposite one
      const double mass_term = area / 6.0 * (sum_mid2 - mid2[l]);
      grad[tri[l]] += energy - mu * mass_term;
    }
  }
  return grad / u_k_u;
}

Eigen::VectorXd eigenvalue_gradient(const SurfaceMesh& mesh, const SparseSymSystem& system,
                                    double mu, const Eigen::VectorXd& u, double residual_tol) {
  if (u.size() != mesh.num_vertices() || system.dimension() != mesh.num_vertices()) {
    throw StructuralError("eigenvector length does not match the mesh");
  }
  const Eigen::VectorXd ku = system.mass * u;
  const double u_k_u = u.dot(ku);
  const double residual = (system.stiffness * u - mu * ku).norm() / ku.norm();
  if (!(residual <= residual_tol)) {
    throw StaleEigenpairError("eigenpair residual " + std::to_string(residual) +
                              " exceeds tolerance " + std::to_string(residual_tol));
  }
  return eigenvalue_gradient_unchecked(mesh, mu, u, u_k_u);
}

Eigen::VectorXd eigenvalue_gradient(const SurfaceMesh& mesh, const DensityField& rho,
                                    double epsilon, double mu, const Eigen::VectorXd& u,
                                    double residual_tol) {
  return eigenvalue_gradient(mesh, assemble_system(mesh, rho, epsilon), mu, u, residual_tol);
}

}  // namespace neumann

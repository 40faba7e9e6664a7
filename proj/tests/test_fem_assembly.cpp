#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "neumann/eig_solver.hpp"
#include "neumann/errors.hpp"
#include "neumann/fem_assembly.hpp"
#include "neumann/surface_mesh.hpp"

using namespace neumann;

namespace {

DensityField random_density(const SurfaceMesh& mesh, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(mesh.num_vertices());
  for (double& x : v) x = u(rng);
  return DensityField(mesh, std::move(v));
}

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// Element matrices built from scratch with the cotangent formula and the
// midpoint rule, as an independent oracle for small meshes.
void oracle_system(const SurfaceMesh& mesh, const std::vector<double>& rho, double eps,
                   Eigen::MatrixXd& stiff, Eigen::MatrixXd& mass) {
  const int n = mesh.num_vertices();
  stiff = Eigen::MatrixXd::Zero(n, n);
  mass = Eigen::MatrixXd::Zero(n, n);
  for (const Triangle& t : mesh.triangles()) {
    const Vec3 p[3] = {mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2])};
    const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    const double rbar = (rho[t[0]] + rho[t[1]] + rho[t[2]]) / 3.0;
    for (int i = 0; i < 3; ++i) {
      // cotangent of the angle at vertex i weights the opposite edge
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      const Vec3 a = p[j] - p[i], b = p[k] - p[i];
      const double cot = a.dot(b) / a.cross(b).norm();
      const double w = 0.5 * cot * (rbar + eps);
      stiff(t[j], t[k]) -= w;
      stiff(t[k], t[j]) -= w;
      stiff(t[j], t[j]) += w;
      stiff(t[k], t[k]) += w;
    }
    // midpoint rule: at the midpoint of edge (a, b) the hats are 1/2, 1/2, 0
    for (int e = 0; e < 3; ++e) {
      const int a = e, b = (e + 1) % 3;
      const double r = 0.5 * (rho[t[a]] + rho[t[b]]) + eps * eps;
      double phi[3] = {0, 0, 0};
      phi[a] = phi[b] = 0.5;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mass(t[i], t[j]) += area / 3.0 * r * phi[i] * phi[j];
    }
  }
}

}  // namespace

TEST_CASE("assembly matches the cotangent and midpoint oracle") {
  const SurfaceMesh mesh = make_icosphere(1);
  const DensityField rho = random_density(mesh, 7);
  const SparseSymSystem sys = assemble_system(mesh, rho, 1e-3);
  Eigen::MatrixXd s, m;
  oracle_system(mesh, {rho.values().begin(), rho.values().end()}, 1e-3, s, m);
  CHECK((Eigen::MatrixXd(sys.stiffness) - s).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((Eigen::MatrixXd(sys.mass) - m).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("symmetry, constant kernel and mass vector") {
  const SurfaceMesh mesh = make_icosphere(3);
  const DensityField rho = random_density(mesh, 3);
  const SparseSymSystem sys = assemble_system(mesh, rho, 1e-4);
  const SparseMatrix mt = sys.stiffness.transpose();
  const SparseMatrix kt = sys.mass.transpose();
  CHECK(max_abs(sys.stiffness - mt) == 0.0);
  CHECK(max_abs(sys.mass - kt) == 0.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_vertices());
  CHECK((sys.stiffness * ones).cwiseAbs().maxCoeff() <= 1e-10 * max_abs(sys.stiffness));
  CHECK(sys.mass_vector.sum() == doctest::Approx(total_area(mesh)).epsilon(1e-12));
}

TEST_CASE("Dirichlet energy of the coordinate function") {
  // int |grad x|^2 = 2 int x^2 = 8 pi / 3
  const SurfaceMesh mesh = make_icosphere(4);
  const SparseSymSystem sys = assemble_system(mesh, DensityField::constant(mesh, 1.0), 1e-12);
  Eigen::VectorXd x(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) x[i] = mesh.vertex(i).x();
  const double energy = x.dot(sys.stiffness * x);
  CHECK(std::abs(energy / (8.0 * std::numbers::pi / 3.0) - 1.0) < 1e-2);
}

TEST_CASE("void density scales the plain matrices") {
  // linearity in rho
  const SurfaceMesh mesh = make_icosphere(3);
  const double eps = 1e-4;
  const SparseSymSystem sys = assemble_system(mesh, DensityField::constant(mesh, 0.0), eps);
  const SparseSymSystem plain = assemble_plain(mesh);
  CHECK(max_abs(sys.stiffness - eps * plain.stiffness) <= 1e-14 * max_abs(sys.stiffness) + 1e-20);
  CHECK(max_abs(sys.mass - eps * eps * plain.mass) <= 1e-14 * max_abs(sys.mass) + 1e-24);
  CHECK(mass_vector(mesh).isApprox(plain.mass * Eigen::VectorXd::Ones(mesh.num_vertices()), 1e-13));
}

TEST_CASE("mismatched mesh is rejected") {
  const SurfaceMesh a = make_icosphere(2), b = make_icosphere(2);
  CHECK_THROWS_AS(assemble_system(a, DensityField::constant(b, 0.5), 1e-4), StructuralError);
}

TEST_CASE("gradient of the constant mode vanishes and is scale invariant") {
  const SurfaceMesh mesh = make_icosphere(2);
  const DensityField rho = random_density(mesh, 11);
  const SparseSymSystem sys = assemble_system(mesh, rho, 1e-4);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_vertices());
  CHECK(eigenvalue_gradient(mesh, sys, 0.0, ones).cwiseAbs().maxCoeff() < 1e-12);

  const EigenResult r = solve_smallest(sys, 4);
  const Eigen::VectorXd u = r.eigenvectors.col(1);
  const Eigen::VectorXd g1 = eigenvalue_gradient(mesh, sys, r.eigenvalues[1], u);
  const Eigen::VectorXd g2 = eigenvalue_gradient(mesh, sys, r.eigenvalues[1], Eigen::VectorXd(-3.7 * u));
  CHECK((g1 - g2).norm() <= 1e-12 * g1.norm());
  CHECK_THROWS_AS(eigenvalue_gradient(mesh, sys, r.eigenvalues[1] * 1.1, u), StaleEigenpairError);
}

TEST_CASE("eigenvalue gradient against central differences") {
  // finite-difference oracle, 20 random (rho, vertex) probes
  const SurfaceMesh mesh = make_icosphere(3);
  const double eps = 1e-4, h = 1e-6;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, mesh.num_vertices() - 1);
  int probes = 0;
  for (std::uint64_t seed = 0; probes < 20; ++seed) {
    const DensityField rho = random_density(mesh, 100 + seed, 0.2, 0.8);
    const SparseSymSystem sys = assemble_system(mesh, rho, eps);
    EigOptions opt;
    opt.count = 4;
    opt.tol = 1e-12;
    const EigenResult r = solve_smallest(sys.stiffness, sys.mass, opt);
    if (r.eigenvalues[2] - r.eigenvalues[1] < 1e-3 * r.eigenvalues[1]) continue;  // simple only
    const Eigen::VectorXd grad = eigenvalue_gradient(mesh, sys, r.eigenvalues[1], r.eigenvectors.col(1));
    for (int trial = 0; trial < 5 && probes < 20; ++trial, ++probes) {
      const int l = pick(rng);
      auto mu_at = [&](double delta) {
        std::vector<double> v(rho.values().begin(), rho.values().end());
        v[l] += delta;
        const SparseSymSystem s = assemble_system(mesh, DensityField(mesh, v), eps);
        EigOptions o = opt;
        o.initial = r.eigenvectors;
        return solve_smallest(s.stiffness, s.mass, o).eigenvalues[1];
      };
      const double fd = (mu_at(h) - mu_at(-h)) / (2 * h);
      CHECK(std::abs(fd - grad[l]) <= 1e-5 * std::abs(grad[l]) + 1e-9);
    }
  }
}

TEST_CASE("more density means more mass") {
  const SurfaceMesh mesh = make_icosphere(2);
  const DensityField rho = random_density(mesh, 5);
  std::vector<double> more(rho.values().begin(), rho.values().end());
  more[7] = std::min(1.0, more[7] + 0.2);
  const SparseSymSystem a = assemble_system(mesh, rho, 1e-4);
  const SparseSymSystem b = assemble_system(mesh, DensityField(mesh, more), 1e-4);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.num_vertices());
  u[7] = 1.0;
  CHECK(u.dot(b.mass * u) > u.dot(a.mass * u));
}

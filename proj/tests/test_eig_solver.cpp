#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "neumann/eig_solver.hpp"
#include "neumann/fem_assembly.hpp"
#include "neumann/surface_mesh.hpp"

using namespace neumann;

namespace {

DensityField random_density(const SurfaceMesh& mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(mesh.num_vertices());
  for (double& x : v) x = u(rng);
  return DensityField(mesh, std::move(v));
}

SparseMatrix diag3(double a, double b, double c) {
  SparseMatrix m(3, 3);
  m.insert(0, 0) = a;
  m.insert(1, 1) = b;
  m.insert(2, 2) = c;
  m.makeCompressed();
  return m;
}

void check_invariants(const SparseSymSystem& sys, const EigenResult& r, double tol) {
  for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) CHECK(r.eigenvalues[i] >= r.eigenvalues[i - 1]);
  CHECK(r.eigenvalues[0] >= 0.0);
  CHECK(r.eigenvalues[0] <= tol);
  const Eigen::MatrixXd gram = r.eigenvectors.transpose() * (sys.mass * r.eigenvectors);
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-8);
  for (int i = 0; i < static_cast<int>(r.eigenvalues.size()); ++i) {
    const Eigen::VectorXd u = r.eigenvectors.col(i);
    const Eigen::VectorXd ku = sys.mass * u;
    const double res = (sys.stiffness * u - r.eigenvalues[i] * ku).norm();
    CHECK(res <= tol * ku.norm() * (1.0 + 1e-6));
  }
}

}  // namespace

TEST_CASE("diagonal toy problem") {
  EigOptions opt;
  opt.count = 3;
  const EigenResult r = solve_smallest(diag3(0, 1, 2), diag3(1, 1, 1), opt);
  REQUIRE(r.eigenvalues.size() == 3);
  CHECK(r.eigenvalues[0] == doctest::Approx(0.0));
  CHECK(r.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(r.eigenvalues[2] == doctest::Approx(2.0));
}

TEST_CASE("indefinite mass matrix is rejected") {
  EigOptions opt;
  opt.count = 2;
  CHECK_THROWS_AS(solve_smallest(diag3(0, 1, 2), diag3(1, -1, 1), opt), AssemblyContractError);
}

TEST_CASE("argument checks") {
  EigOptions opt;
  opt.count = 4;
  CHECK_THROWS_AS(solve_smallest(diag3(0, 1, 2), diag3(1, 1, 1), opt), SizeError);
  opt.count = 0;
  CHECK_THROWS_AS(solve_smallest(diag3(0, 1, 2), diag3(1, 1, 1), opt), SizeError);
}

TEST_CASE("unit density on the sphere reproduces l(l+1)") {
  // spherical harmonics: 0, 2 (x3), 6 (x5)
  const SurfaceMesh mesh = make_icosphere(5);
  const SparseSymSystem sys = assemble_system(mesh, DensityField::constant(mesh, 1.0), 1e-4);
  const EigenResult r = solve_smallest(sys, 9);
  REQUIRE(r.eigenvalues.size() == 9);
  CHECK(r.path != SolverPath::Dense);
  for (int i = 1; i <= 3; ++i) CHECK(std::abs(r.eigenvalues[i] / 2.0 - 1.0) < 0.01);
  for (int i = 4; i <= 8; ++i) CHECK(std::abs(r.eigenvalues[i] / 6.0 - 1.0) < 0.02);
  check_invariants(sys, r, 1e-9);
}

TEST_CASE("first torus pair is double") {
  // rotational symmetry about the axis
  const SurfaceMesh mesh = make_torus(2.0, 1.0, 64, 32);
  const SparseSymSystem sys = assemble_system(mesh, DensityField::constant(mesh, 1.0), 1e-4);
  const EigenResult r = solve_smallest(sys, 5);
  CHECK(std::abs(r.eigenvalues[2] / r.eigenvalues[1] - 1.0) < 5e-3);
  check_invariants(sys, r, 1e-9);
}

TEST_CASE("invariants for a random density and both preconditioners") {
  const SurfaceMesh mesh = make_icosphere(3);
  const SparseSymSystem sys = assemble_system(mesh, random_density(mesh, 42), 1e-4);
  EigOptions opt;
  opt.count = 6;
  const EigenResult a = solve_smallest(sys.stiffness, sys.mass, opt);
  check_invariants(sys, a, 1e-9);
  opt.preconditioner = Preconditioner::Jacobi;
  const EigenResult b = solve_smallest(sys.stiffness, sys.mass, opt);
  check_invariants(sys, b, 1e-9);
  opt.force_block_krylov = true;
  const EigenResult c = solve_smallest(sys.stiffness, sys.mass, opt);
  CHECK(c.path == SolverPath::BlockKrylov);
  const EigenResult d = solve_dense(sys.stiffness, sys.mass, 6);
  for (int i = 1; i < 6; ++i) {
    CHECK(a.eigenvalues[i] == doctest::Approx(d.eigenvalues[i]).epsilon(1e-8));
    CHECK(b.eigenvalues[i] == doctest::Approx(d.eigenvalues[i]).epsilon(1e-8));
    CHECK(c.eigenvalues[i] == doctest::Approx(d.eigenvalues[i]).epsilon(1e-8));
  }
}

TEST_CASE("shift invariance") {
  const SurfaceMesh mesh = make_icosphere(3);
  const SparseSymSystem sys = assemble_system(mesh, random_density(mesh, 9), 1e-4);
  const double c = 0.75;
  const SparseMatrix shifted = sys.stiffness + c * sys.mass;
  EigOptions opt;
  opt.count = 5;
  opt.tol = 1e-11;
  const EigenResult a = solve_smallest(sys.stiffness, sys.mass, opt);
  const EigenResult b = solve_smallest(shifted, sys.mass, opt);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(b.eigenvalues[i] - a.eigenvalues[i] - c) <= 1e-9 * b.eigenvalues[i]);
}

TEST_CASE("extra mass never raises the Rayleigh quotient") {
  // K' - K is positive semidefinite with M held fixed
  const SurfaceMesh mesh = make_icosphere(2);
  const DensityField rho = random_density(mesh, 1);
  std::vector<double> more(rho.values().begin(), rho.values().end());
  for (double& v : more) v = std::min(1.0, v + 0.25);
  const SparseSymSystem a = assemble_system(mesh, rho, 1e-4);
  const SparseSymSystem b = assemble_system(mesh, DensityField(mesh, more), 1e-4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd u(mesh.num_vertices());
    for (int i = 0; i < u.size(); ++i) u[i] = n01(rng);
    const double num = u.dot(a.stiffness * u);
    CHECK(num / u.dot(b.mass * u) <= num / u.dot(a.mass * u));
  }
}

TEST_CASE("fixed seed gives identical results") {
  const SurfaceMesh mesh = make_icosphere(3);
  const SparseSymSystem sys = assemble_system(mesh, random_density(mesh, 5), 1e-4);
  EigOptions opt;
  opt.count = 5;
  opt.seed = 17;
  const EigenResult a = solve_smallest(sys.stiffness, sys.mass, opt);
  const EigenResult b = solve_smallest(sys.stiffness, sys.mass, opt);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvectors == b.eigenvectors);
}

TEST_CASE("iteration cap raises a convergence error with residuals") {
  const SurfaceMesh mesh = make_icosphere(3);
  const SparseSymSystem sys = assemble_system(mesh, random_density(mesh, 5), 1e-4);
  EigOptions opt;
  opt.count = 5;
  opt.max_iters = 1;
  opt.tol = 1e-15;
  opt.preconditioner = Preconditioner::Jacobi;
  try {
    solve_smallest(sys.stiffness, sys.mass, opt);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residuals().size() == 5);
  }
}

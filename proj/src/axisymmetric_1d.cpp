#include "neumann/axisymmetric_1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>

#include "neumann/eig_solver.hpp"
#include "neumann/errors.hpp"

namespace neumann {

namespace {

constexpr double kPi = std::numbers::pi;

// Five-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGaussX{-0.9061798459386640, -0.5384693101056831, 0.0,
                                        0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW{0.2369268850561891, 0.4786286704993665,
                                        0.5688888888888889, 0.4786286704993665,
                                        0.2369268850561891};

// 2 sin x - 2 x cos x, by its series where direct evaluation cancels.
double sin_moment(double x) {
  if (x > 0.25) return 2.0 * std::sin(x) - 2.0 * x * std::cos(x);
  double term = x;
  double sum = 0.0;
  double fact_odd = 1.0;   // (2n+1)!
  double fact_even = 1.0;  // (2n)!
  for (int n = 0; n < 12; ++n) {
    if (n > 0) {
      fact_even = fact_odd * (2 * n);
      fact_odd = fact_even * (2 * n + 1);
    }
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    sum += sign * term * (1.0 / fact_odd - 1.0 / fact_even);
    term *= x * x;
  }
  return 2.0 * sum;
}

// Exact int_a^{a+h} psi_q(theta) sin(theta) for the two hats of the element.
std::array<double, 2> hat_sin_integrals(double a, double h) {
  const double c = a + 0.5 * h;
  const double even = h * std::sin(c) * std::sin(0.5 * h);
  const double odd = std::cos(c) * sin_moment(0.5 * h);
  return {(even - odd) / h, (even + odd) / h};
}

// Element integrals of a 1D problem on [a, a+h] with nodal density (r0, r1).
struct Element1D {
  std::array<double, 2> hat_sin;         // int psi_q sin
  std::array<std::array<double, 4>, 2> sin_mass;  // int psi_q sin psi_i psi_j
  std::array<std::array<double, 4>, 2> inv_sin;   // int psi_q psi_i psi_j / sin
  std::array<double, 4> plain_inv_sin;   // int psi_i psi_j / sin
  std::array<double, 4> plain_mass;      // int psi_i psi_j
  double h = 0.0;
};

Element1D element(double a, double h) {
  Element1D e;
  e.h = h;
  e.hat_sin = hat_sin_integrals(a, h);
  e.sin_mass = {};
  e.inv_sin = {};
  e.plain_inv_sin = {};
  for (int g = 0; g < 5; ++g) {
    const double t = 0.5 * (kGaussX[g] + 1.0);
    const double th = a + t * h;
    const double w = 0.5 * h * kGaussW[g];
    const std::array<double, 2> psi{1.0 - t, t};
    const double s = std::sin(th);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        e.plain_inv_sin[2 * i + j] += w * psi[i] * psi[j] / s;
        for (int q = 0; q < 2; ++q) {
          e.sin_mass[q][2 * i + j] += w * psi[q] * s * psi[i] * psi[j];
          e.inv_sin[q][2 * i + j] += w * psi[q] * psi[i] * psi[j] / s;
        }
      }
  }
  e.plain_mass = {h / 3.0, h / 6.0, h / 6.0, h / 3.0};
  return e;
}

// Tridiagonal pair on nodes first..last of a uniform grid over [0, length].
struct Tridiag {
  SparseMatrix stiffness;
  SparseMatrix mass;
};

Tridiag to_sparse(int n, const std::vector<std::array<double, 4>>& a_el,
                  const std::vector<std::array<double, 4>>& b_el, int first, int last) {
  std::vector<Eigen::Triplet<double>> ta, tb;
  for (int e = 0; e < static_cast<int>(a_el.size()); ++e) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const int r = e + i, c = e + j;
        if (r < first || r > last || c < first || c > last) continue;
        ta.emplace_back(r - first, c - first, a_el[e][2 * i + j]);
        tb.emplace_back(r - first, c - first, b_el[e][2 * i + j]);
      }
  }
  Tridiag t;
  t.stiffness.resize(n, n);
  t.mass.resize(n, n);
  t.stiffness.setFromTriplets(ta.begin(), ta.end());
  t.mass.setFromTriplets(tb.begin(), tb.end());
  return t;
}

std::array<double, 4> stiff_from(double coeff_integral, double h) {
  const double s = coeff_integral / (h * h);
  return {s, -s, -s, s};
}

struct AxisymSystems {
  Tridiag mode1;  // interior nodes 1..N-1
  Tridiag mode0;  // all nodes
  std::vector<Element1D> elements;
};

AxisymSystems assemble_axisym(std::span<const double> rho, double eps) {
  const int n_el = static_cast<int>(rho.size()) - 1;
  const double h = kPi / n_el;
  AxisymSystems sys;
  sys.elements.reserve(n_el);
  std::vector<std::array<double, 4>> a1(n_el), a0(n_el), b(n_el);
  for (int e = 0; e < n_el; ++e) {
    sys.elements.push_back(element(e * h, h));
    const Element1D& el = sys.elements.back();
    const double r0 = rho[e], r1 = rho[e + 1];
    const auto k = stiff_from(r0 * el.hat_sin[0] + r1 * el.hat_sin[1] + eps * h, h);
    for (int s = 0; s < 4; ++s) {
      const double zeroth =
          r0 * el.inv_sin[0][s] + r1 * el.inv_sin[1][s] + eps * el.plain_inv_sin[s];
      a0[e][s] = k[s];
      a1[e][s] = k[s] + zeroth;
      b[e][s] = r0 * el.sin_mass[0][s] + r1 * el.sin_mass[1][s] + eps * eps * el.plain_mass[s];
    }
  }
  sys.mode1 = to_sparse(n_el - 1, a1, b, 1, n_el - 1);
  sys.mode0 = to_sparse(n_el + 1, a0, b, 0, n_el);
  return sys;
}

// The attainable relative residual of these pairs degrades like 1/h^2.
EigenResult solve_pair(const Tridiag& t, int count, double h) {
  EigOptions opt;
  opt.count = std::min(count, static_cast<int>(t.stiffness.rows()));
  opt.tol = std::max(1e-10, 1e-13 / (h * h));
  return solve_smallest(t.stiffness, t.mass, opt);
}

// d mu / d rho_l for an eigenpair of one branch; y has full grid length.
Eigen::VectorXd branch_gradient(const std::vector<Element1D>& elements, bool with_zeroth,
                                double mu, const Eigen::VectorXd& y, double y_b_y) {
  const int n_el = static_cast<int>(elements.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_el + 1);
  for (int e = 0; e < n_el; ++e) {
    const Element1D& el = elements[e];
    const std::array<double, 2> ye{y[e], y[e + 1]};
    auto quad = [&](const std::array<double, 4>& m) {
      return ye[0] * (m[0] * ye[0] + m[1] * ye[1]) + ye[1] * (m[2] * ye[0] + m[3] * ye[1]);
    };
    const double dy = ye[1] - ye[0];
    for (int q = 0; q < 2; ++q) {
      double v = el.hat_sin[q] * dy * dy / (el.h * el.h);
      if (with_zeroth) v += quad(el.inv_sin[q]);
      v -= mu * quad(el.sin_mass[q]);
      grad[e + q] += v;
    }
  }
  return grad / y_b_y;
}

Eigen::MatrixXd pad_interior(const Eigen::MatrixXd& v) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows() + 2, v.cols());
  out.middleRows(1, v.rows()) = v;
  return out;
}

void check_grid(int n_elements) {
  if (n_elements < 4) throw SizeError("latitude grid needs at least 4 elements");
}

// P1 eigenproblems of the geodesic cap of radius theta_m.
Tridiag cap_system(double theta_m, int n_el, bool mode1) {
  const double h = theta_m / n_el;
  std::vector<std::array<double, 4>> a(n_el), b(n_el);
  for (int e = 0; e < n_el; ++e) {
    const Element1D el = element(e * h, h);
    const auto k = stiff_from(el.hat_sin[0] + el.hat_sin[1], h);
    for (int s = 0; s < 4; ++s) {
      a[e][s] = k[s] + (mode1 ? el.plain_inv_sin[s] : 0.0);
      b[e][s] = el.sin_mass[0][s] + el.sin_mass[1][s];
    }
  }
  return mode1 ? to_sparse(n_el, a, b, 1, n_el) : to_sparse(n_el + 1, a, b, 0, n_el);
}

double cap_theta(double m) {
  if (!(m > 0.0 && m < 4.0 * kPi)) throw DomainError("cap area must lie in (0, 4 pi)");
  return cap_radius_from_area(m);
}

}  // namespace

LatitudeDensity::LatitudeDensity(std::vector<double> values) : values_(std::move(values)) {
  check_grid(static_cast<int>(values_.size()) - 1);
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("latitude density values must lie in [0, 1]");
  }
}

LatitudeDensity LatitudeDensity::constant(int n_elements, double value) {
  check_grid(n_elements);
  return LatitudeDensity(std::vector<double>(n_elements + 1, value));
}

double LatitudeDensity::theta(int i) const { return i * kPi / elements(); }

Eigen::VectorXd latitude_mass_vector(int n_elements) {
  check_grid(n_elements);
  const double h = kPi / n_elements;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_elements + 1);
  for (int e = 0; e < n_elements; ++e) {
    const auto hs = hat_sin_integrals(e * h, h);
    g[e] += 2.0 * kPi * hs[0];
    g[e + 1] += 2.0 * kPi * hs[1];
  }
  return g;
}

AxisymSpectrum axisym_spectrum(const LatitudeDensity& rho, double epsilon, int count) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const AxisymSystems sys = assemble_axisym(rho.values(), epsilon);
  const double h = kPi / rho.elements();
  const EigenResult r1 = solve_pair(sys.mode1, count, h);
  const EigenResult r0 = solve_pair(sys.mode0, count + 1, h);
  return {r1.eigenvalues, r0.eigenvalues, pad_interior(r1.eigenvectors), r0.eigenvectors};
}

double axisym_mu1(const LatitudeDensity& rho, double epsilon) {
  const AxisymSpectrum s = axisym_spectrum(rho, epsilon, 1);
  return std::min(s.mode1[0], s.mode0[1]);
}

double cap_mode1_mu(double m, int n_elements) {
  check_grid(n_elements);
  const double theta_m = cap_theta(m);
  return solve_pair(cap_system(theta_m, n_elements, true), 1, theta_m / n_elements).eigenvalues[0];
}

double cap_mode0_mu(double m, int n_elements) {
  check_grid(n_elements);
  const double theta_m = cap_theta(m);
  return solve_pair(cap_system(theta_m, n_elements, false), 2, theta_m / n_elements).eigenvalues[1];
}

double cap_reference_mu1(double m, int n_elements) {
  return std::min(cap_mode1_mu(m, n_elements), cap_mode0_mu(m, n_elements));
}

double union_of_k_balls_mu(double m, int k, int n_elements) {
  if (k < 1) throw DomainError("k must be at least 1");
  return cap_reference_mu1(m / k, n_elements);
}

SpectralEvaluator latitude_evaluator(int n_elements, double epsilon, int count) {
  check_grid(n_elements);
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  return [n_elements, epsilon, count](std::span<const double> rho) {
    if (static_cast<int>(rho.size()) != n_elements + 1) {
      throw StructuralError("latitude density has the wrong length");
    }
    auto sys = std::make_shared<AxisymSystems>(assemble_axisym(rho, epsilon));
    const double h = kPi / n_elements;
    auto r1 = std::make_shared<EigenResult>(solve_pair(sys->mode1, count, h));
    auto r0 = std::make_shared<EigenResult>(solve_pair(sys->mode0, count + 1, h));

    // (branch, index) of every entry after the leading zero
    std::vector<std::pair<int, int>> source;
    for (int i = 0; i < static_cast<int>(r1->eigenvalues.size()); ++i) source.emplace_back(1, i);
    for (int i = 1; i < static_cast<int>(r0->eigenvalues.size()); ++i) source.emplace_back(0, i);
    auto value = [&](const std::pair<int, int>& s) {
      return s.first == 1 ? r1->eigenvalues[s.second] : r0->eigenvalues[s.second];
    };
    std::stable_sort(source.begin(), source.end(),
                     [&](const auto& x, const auto& y) { return value(x) < value(y); });
    if (static_cast<int>(source.size()) > count) source.resize(count);

    SpectralPoint pt;
    pt.eigenvalues.push_back(0.0);
    for (const auto& s : source) pt.eigenvalues.push_back(value(s));
    auto src = std::make_shared<std::vector<std::pair<int, int>>>(std::move(source));
    pt.gradient = [sys, r1, r0, src](int i) -> Eigen::VectorXd {
      if (i == 0) return Eigen::VectorXd::Zero(sys->elements.size() + 1);
      const auto [branch, idx] = (*src)[i - 1];
      if (branch == 1) {
        const Eigen::VectorXd y_int = r1->eigenvectors.col(idx);
        const double yby = y_int.dot(sys->mode1.mass * y_int);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(y_int.size() + 2);
        y.segment(1, y_int.size()) = y_int;
        return branch_gradient(sys->elements, true, r1->eigenvalues[idx], y, yby);
      }
      const Eigen::VectorXd y = r0->eigenvectors.col(idx);
      const double yby = y.dot(sys->mode0.mass * y);
      return branch_gradient(sys->elements, false, r0->eigenvalues[idx], y, yby);
    };
    return pt;
  };
}

Density1DResult optimize_density_1d(double m, int n_elements, DensityOptConfig config) {
  check_grid(n_elements);
  if (!(m > 0.0 && m < 4.0 * kPi)) throw DomainError("mass must lie in (0, 4 pi)");
  config.target_mass = m;
  AscentProblem problem;
  problem.mass_vector = latitude_mass_vector(n_elements);
  problem.evaluate = latitude_evaluator(n_elements, config.epsilon, config.k + config.eig_window);
  for (int i = 0; i <= n_elements; ++i) {
    problem.adjacency_start.push_back(static_cast<int>(problem.adjacency.size()));
    if (i > 0) problem.adjacency.push_back(i - 1);
    if (i < n_elements) problem.adjacency.push_back(i + 1);
  }
  problem.adjacency_start.push_back(static_cast<int>(problem.adjacency.size()));

  OptTrace trace;
  AscentOutcome best = multistart_ascent(problem, config, trace);
  for (double& v : best.density) v = std::clamp(v, 0.0, 1.0);
  return {LatitudeDensity(std::move(best.density)), std::move(trace)};
}

double dispersion(const LatitudeDensity& rho) {
  const int n = rho.elements();
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s += w * rho[i] * (1.0 - rho[i]);
  }
  // N/pi * (pi/N) * sum
  return s;
}

std::vector<double> dispersion_ratio(double m, const std::vector<int>& grid_sizes,
                                     const DensityOptConfig& config) {
  if (grid_sizes.empty()) throw SizeError("no grid sizes given");
  if (!std::is_sorted(grid_sizes.begin(), grid_sizes.end())) {
    throw DomainError("grid sizes must be ascending");
  }
  std::vector<double> h;
  for (int n : grid_sizes) h.push_back(dispersion(optimize_density_1d(m, n, config).density));
  if (!(h[0] > 0.0)) throw DomainError("reference dispersion is zero; ratio undefined");
  for (double& v : h) v /= h.front();
  return h;
}

}  // namespace neumann

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "neumann/density_optimizer.hpp"
#include "neumann/surface_mesh.hpp"

namespace neumann {

/// Signed nodal function phi; the domain is {phi < 0}.
class LevelSetField {
 public:
  LevelSetField(const SurfaceMesh& mesh, std::vector<double> phi, double sigma_s = 1e-5,
                int redistance_period = 20);

  std::span<const double> values() const { return phi_; }
  double operator[](int i) const { return phi_[i]; }
  int size() const { return static_cast<int>(phi_.size()); }
  double sigma() const { return sigma_; }
  int redistance_period() const { return period_; }
  std::uint64_t mesh_id() const { return mesh_id_; }

  /// Same smoothing and period, new values on the same mesh.
  LevelSetField with_values(std::vector<double> phi) const;

 private:
  std::vector<double> phi_;
  double sigma_;
  int period_;
  std::uint64_t mesh_id_;
};

struct LevelSetConfig {
  int k = 1;
  double epsilon = 1e-4;
  double sigma_s = 1e-5;
  /// Fixed-phase step: dt = gamma / ||v||_inf.
  double gamma = 3e-2;
  /// Area penalty weight.
  double b = 5.0;
  double target_area = 2.0;
  /// Steps of the fixed-step phase.
  int n_steps = 600;
  /// Upper bound on steps of the adaptive phase (it also stops once
  /// dt < min_dt).
  int adaptive_steps = 200;
  double min_dt = 1e-7;
  /// Trigonometric degrees of the random initial field.
  int trig_p = 3;
  int trig_q = 3;
  std::uint64_t seed = 0;
  int restarts = 1;
  /// Replaces the random field of restart 0 when set.
  std::optional<std::vector<double>> initial_phi;
  bool regularize = true;
  double alpha = 0.1;
  int redistance_period = 20;
  double p = 20.0;
  /// Wider than the density default: with a 5% gap the smoothed objective
  /// jumps upward when a double eigenvalue splits past the threshold, so
  /// slightly elongated shapes outscore the round one.
  double cluster_rel_gap = 0.15;
  int eig_window = 4;
  double eig_tol = 1e-9;
  RecordObserver observer;
};

/// Re sum_{j<=p, l<=q} c_{jl} exp(i (j s + l t)) in the surface angles (s, t),
/// complex Gaussian coefficients, scaled to max |phi| = 1.
LevelSetField init_random_levelset(const SurfaceMesh& mesh, int p, int q, std::uint64_t seed,
                                   double sigma_s = 1e-5, int redistance_period = 20);

/// 1/2 (1 - phi / sqrt(phi^2 + sigma^2)) at every vertex.
DensityField smoothed_indicator(const SurfaceMesh& mesh, const LevelSetField& ls);

struct CostVelocity {
  double J = 0.0;
  /// Nodal normal velocity; positive values grow the domain.
  std::vector<double> v;
  /// Smoothed cluster value standing for mu_k.
  double mu = 0.0;
  double area = 0.0;
  std::vector<double> eigenvalues;
  int cluster = 1;
};

/// Ersatz solve and the chain rule of J = |Omega| mu_k - b (|Omega| - m')^2.
/// The velocity is not regularized here.
CostVelocity cost_and_velocity(const SurfaceMesh& mesh, const LevelSetField& ls,
                               const LevelSetConfig& config);

/// Solves (alpha M1 + K1) w = K1 raw_v with the plain stiffness M1 and mass K1.
std::vector<double> regularize_velocity(const SurfaceMesh& mesh, std::span<const double> raw_v,
                                        double alpha);

/// Area-weighted average of the incident triangle gradient norms.
std::vector<double> nodal_gradient_norm(const SurfaceMesh& mesh, std::span<const double> phi);

/// Explicit update phi <- phi - dt v |grad phi|, sub-stepped so that each
/// substep satisfies dt_sub <= 0.5 h_min / max|v|.
LevelSetField advect(const SurfaceMesh& mesh, const LevelSetField& ls, std::span<const double> v,
                     double dt);

struct RedistanceResult {
  LevelSetField field;
  bool has_interface = true;
};

/// Signed geodesic distance to the zero set of the P1 interpolant, computed by
/// fast marching on the triangulation.
RedistanceResult redistance(const SurfaceMesh& mesh, const LevelSetField& ls);

/// Exact area of {phi_h < 0} for the P1 interpolant on the flat triangles.
double domain_area(const SurfaceMesh& mesh, const LevelSetField& ls);

struct LevelSetResult {
  LevelSetField field;
  OptTrace trace;
  double J = 0.0;
  double mu = 0.0;
  double area = 0.0;
  std::vector<double> eigenvalues;
  StrichartzAudit audit;
};

/// Ersatz level-set ascent on J: fixed-step phase, then the adaptive phase,
/// keeping the best iterate; multi-start over derived seeds.
LevelSetResult optimize_levelset(const SurfaceMesh& mesh, const LevelSetConfig& config);

}  // namespace neumann

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "neumann/eig_solver.hpp"
#include "neumann/surface_mesh.hpp"

namespace neumann {

struct OptRecord {
  int restart = 0;
  int iteration = 0;
  /// Smoothed objective at the accepted iterate, with the cluster fixed at the
  /// size detected at the start of the step.
  double objective = 0.0;
  /// Same functional evaluated at the start of the step.
  double objective_start = 0.0;
  /// mu_k .. mu_{k+cluster-1} at the accepted iterate.
  std::vector<double> eigenvalues;
  double mass = 0.0;
  double step = 0.0;
  int cluster = 1;
};

/// Called with every record as it is appended to a trace.
using RecordObserver = std::function<void(const OptRecord&)>;

struct DensityOptConfig {
  /// Index of the maximized eigenvalue (mu_0 = 0 is the constant mode).
  int k = 1;
  double target_mass = 2.0;
  double epsilon = 1e-4;
  /// Exponent of the smoothed minimum over a cluster.
  double p = 20.0;
  /// Cluster threshold relative to the current mu_k; ignored when
  /// `cluster_gap` is set.
  double cluster_rel_gap = 0.05;
  std::optional<double> cluster_gap;
  int max_iters = 300;
  int restarts = 1;
  std::uint64_t seed = 0;
  /// Vertices forced to zero density.
  std::vector<bool> exclusion_mask;
  /// Optional starting density for the first restart (projected first).
  std::optional<std::vector<double>> initial_density;

  /// Largest change of any nodal value in the first trial step.
  double initial_step = 0.5;
  double step_grow = 1.5;
  double step_shrink = 0.5;
  /// Barzilai-Borwein trial lengths (still safeguarded by backtracking).
  bool spectral_step = true;
  /// Divide the gradient by the nodal mass, i.e. use the lumped L2 metric.
  bool lumped_metric = true;
  /// Scale each coordinate by rho_i + affine_floor so that small densities
  /// move multiplicatively.
  bool affine_scaling = true;
  double affine_floor = 1e-3;
  int max_backtracks = 30;
  /// Nodes at or below `void_threshold` are held at zero for a step when the
  /// ascent direction points outward or no neighbour reaches
  /// `support_threshold`. A nonpositive threshold disables the guard.
  double void_threshold = 1e-3;
  double support_threshold = 1e-2;
  /// Stop once `stall_iters` consecutive accepted steps each gain less than
  /// `rel_tol` relative to the objective.
  double rel_tol = 1e-7;
  int stall_iters = 15;

  /// Eigenvalues computed beyond mu_k to detect clusters.
  int eig_window = 4;
  double eig_tol = 1e-9;
  RecordObserver observer;
};

struct OptTrace {
  std::vector<OptRecord> records;
  std::vector<double> final_values;
  /// mu_0 .. mu_{k+window-1} of the returned density.
  std::vector<double> final_eigenvalues;
  int best_restart = 0;
  bool failed = false;
  std::string failure;
};

/// Eigenvalues at one density together with a way to differentiate them.
struct SpectralPoint {
  /// Ascending, starting with the constant mode.
  std::vector<double> eigenvalues;
  /// Gradient of eigenvalue i with respect to the nodal density.
  std::function<Eigen::VectorXd(int)> gradient;
};

using SpectralEvaluator = std::function<SpectralPoint(std::span<const double> rho)>;

/// Everything the projected ascent needs to know about a discretization.
struct AscentProblem {
  Eigen::VectorXd mass_vector;
  SpectralEvaluator evaluate;
  /// Optional vertex adjacency (CSR) for the void guard.
  std::vector<int> adjacency_start;
  std::vector<int> adjacency;
};

struct AscentOutcome {
  std::vector<double> density;
  std::vector<double> eigenvalues;
  double objective = 0.0;
};

/// Number of eigenvalues starting at index k that lie within sigma_c of
/// eigs[k], capped by the available window.
int cluster_size(std::span<const double> eigs, int k, double sigma_c);

/// (sum v_i^-p)^(-1/p), evaluated relative to the smallest value.
double smoothed_min(std::span<const double> values, double p);

/// Chain rule: sum_i F^{p+1} v_i^{-p-1} grad v_i.
Eigen::VectorXd smoothed_min_gradient(std::span<const double> values,
                                      const std::vector<Eigen::VectorXd>& gradients, double p);

/// Euclidean projection onto {0 <= rho <= 1, rho . g = m, rho = 0 on mask}.
std::vector<double> project_feasible(std::span<const double> raw, const Eigen::VectorXd& g,
                                     double m, const std::vector<bool>& mask = {});

/// Projection in the metric sum (rho_i - raw_i)^2 / w_i; empty weights give the
/// Euclidean case.
std::vector<double> project_feasible_weighted(std::span<const double> raw,
                                              const Eigen::VectorXd& g, double m,
                                              const std::vector<bool>& mask,
                                              std::span<const double> weights);

/// One projected-ascent run from `start`. Records are appended to `trace`.
AscentOutcome projected_ascent(const AscentProblem& problem, const DensityOptConfig& config,
                               std::vector<double> start, int restart, OptTrace& trace);

/// Multi-start driver shared by the surface and latitude optimizers: restart 0
/// uses `config.initial_density` when present, the others seeded uniform noise.
AscentOutcome multistart_ascent(const AscentProblem& problem, const DensityOptConfig& config,
                                OptTrace& trace);

struct DensityOptResult {
  DensityField density;
  OptTrace trace;
};

DensityOptResult optimize_density(const SurfaceMesh& mesh, const DensityOptConfig& config);

/// Surface spectrum evaluator used by optimize_density; exposed for tests.
SpectralEvaluator surface_evaluator(const SurfaceMesh& mesh, double epsilon, int count,
                                    double tol);

struct StrichartzAudit {
  double product = 0.0;
  double bound = 0.0;
  bool ok = true;
};

/// Checks area * mu_k <= 2 pi k^2 (1 + 1e-6).
StrichartzAudit strichartz_audit(double area, double mu_k, int k);

}  // namespace neumann

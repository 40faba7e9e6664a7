#include "neumann/density_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include "neumann/errors.hpp"
#include "neumann/fem_assembly.hpp"

namespace neumann {

int cluster_size(std::span<const double> eigs, int k, double sigma_c) {
  if (k < 0 || k >= static_cast<int>(eigs.size())) throw SizeError("cluster index outside window");
  int m = 1;
  while (k + m < static_cast<int>(eigs.size()) && eigs[k + m] - eigs[k] <= sigma_c) ++m;
  return m;
}

double smoothed_min(std::span<const double> values, double p) {
  if (values.empty()) throw SizeError("smoothed_min of an empty set");
  double vmin = std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!(v > 0.0)) throw DomainError("smoothed_min needs positive values");
    vmin = std::min(vmin, v);
  }
  if (values.size() == 1) return values[0];
  double s = 0.0;
  for (double v : values) s += std::pow(vmin / v, p);
  return vmin * std::pow(s, -1.0 / p);
}

Eigen::VectorXd smoothed_min_gradient(std::span<const double> values,
                                      const std::vector<Eigen::VectorXd>& gradients, double p) {
  if (values.size() != gradients.size() || values.empty()) {
    throw StructuralError("one gradient per value is required");
  }
  if (values.size() == 1) return gradients[0];
  const double f = smoothed_min(values, p);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(gradients[0].size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (gradients[i].size() != out.size()) throw StructuralError("gradient lengths differ");
    out += std::pow(f / values[i], p + 1.0) * gradients[i];
  }
  return out;
}

std::vector<double> project_feasible(std::span<const double> raw, const Eigen::VectorXd& g,
                                     double m, const std::vector<bool>& mask) {
  return project_feasible_weighted(raw, g, m, mask, {});
}

std::vector<double> project_feasible_weighted(std::span<const double> raw,
                                              const Eigen::VectorXd& g_in, double m,
                                              const std::vector<bool>& mask,
                                              std::span<const double> weights) {
  const int n = static_cast<int>(raw.size());
  if (g_in.size() != n) throw StructuralError("mass vector length does not match the density");
  if (!weights.empty() && static_cast<int>(weights.size()) != n) {
    throw StructuralError("weight length does not match the density");
  }
  // shift direction: the KKT conditions give rho_i = clip(raw_i + lambda w_i g_i)
  Eigen::VectorXd shift = g_in;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    if (!(weights[i] > 0.0)) throw DomainError("projection weights must be positive");
    shift[i] *= weights[i];
  }
  const Eigen::VectorXd& g = g_in;
  if (!mask.empty() && static_cast<int>(mask.size()) != n) {
    throw StructuralError("mask length does not match the density");
  }
  auto masked = [&](int i) { return !mask.empty() && mask[i]; };

  double reachable = 0.0;
  std::vector<double> breaks;
  breaks.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    if (masked(i)) continue;
    if (!(g[i] > 0.0)) throw GeometryError("mass vector must be positive");
    if (!std::isfinite(raw[i])) throw DomainError("projection input is not finite");
    reachable += g[i];
    breaks.push_back(-raw[i] / shift[i]);
    breaks.push_back((1.0 - raw[i]) / shift[i]);
  }
  if (!(m >= 0.0) || m > reachable * (1.0 + 1e-12)) {
    throw FeasibilityError("mass " + std::to_string(m) + " is not reachable (max " +
                           std::to_string(reachable) + ")");
  }

  auto fill = [&](double lambda, std::vector<double>& out) {
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      out[i] = masked(i) ? 0.0 : std::clamp(raw[i] + lambda * shift[i], 0.0, 1.0);
      mass += out[i] * g[i];
    }
    return mass;
  };

  std::vector<double> rho(n);
  if (breaks.empty()) {
    fill(0.0, rho);
    return rho;
  }
  // mass(lambda) is nondecreasing and piecewise linear with kinks at the
  // breakpoints; bisect over them, then interpolate inside one linear piece.
  std::sort(breaks.begin(), breaks.end());
  if (m >= reachable) {
    fill(breaks.back(), rho);
    return rho;
  }
  if (m <= 0.0) {
    fill(breaks.front(), rho);
    return rho;
  }
  std::size_t lo = 0, hi = breaks.size() - 1;  // mass(lo) <= m < mass(hi)
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (fill(breaks[mid], rho) <= m) lo = mid;
    else hi = mid;
  }
  const double m_lo = fill(breaks[lo], rho);
  const double m_hi = fill(breaks[hi], rho);
  double lambda = breaks[lo];
  if (m_hi > m_lo) lambda += (m - m_lo) / (m_hi - m_lo) * (breaks[hi] - breaks[lo]);
  double mass = fill(lambda, rho);
  // a large |lambda| loses digits in raw + lambda * shift; repair the residual
  // on the unclamped entries, which keeps the same KKT form
  for (int pass = 0; pass < 3 && std::abs(mass - m) > 1e-13 * m; ++pass) {
    double slope = 0.0;
    for (int i = 0; i < n; ++i)
      if (!masked(i) && rho[i] > 0.0 && rho[i] < 1.0) slope += g[i] * shift[i];
    if (!(slope > 0.0)) break;
    const double dl = (m - mass) / slope;
    mass = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!masked(i) && rho[i] > 0.0 && rho[i] < 1.0) rho[i] = std::clamp(rho[i] + dl * shift[i], 0.0, 1.0);
      mass += rho[i] * g[i];
    }
  }
  if (std::abs(mass - m) > 1e-10 * m) {
    throw NumericalError("projection failed to reach the mass constraint (" +
                         std::to_string(mass) + " vs " + std::to_string(m) + ")");
  }
  return rho;
}

namespace {

double density_mass(std::span<const double> rho, const Eigen::VectorXd& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) s += rho[i] * g[static_cast<Eigen::Index>(i)];
  return s;
}

double cluster_gap(const DensityOptConfig& cfg, double mu_k) {
  return cfg.cluster_gap ? *cfg.cluster_gap : cfg.cluster_rel_gap * mu_k;
}

double objective_fixed(const std::vector<double>& eigs, int k, int m, double p) {
  const int last = std::min<int>(k + m, static_cast<int>(eigs.size()));
  return smoothed_min(std::span<const double>(eigs.data() + k, last - k), p);
}

void validate(const DensityOptConfig& cfg, const Eigen::VectorXd& g) {
  if (cfg.k < 1) throw DomainError("k must be at least 1");
  if (!(cfg.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(cfg.p >= 2.0)) throw DomainError("p must be at least 2");
  const double area = g.sum();
  if (!(cfg.target_mass > 0.0 && cfg.target_mass < area)) {
    throw DomainError("target mass must lie in (0, total area)");
  }
  if (cfg.restarts < 1) throw SizeError("at least one restart is required");
  if (cfg.eig_window < 1) throw SizeError("eigenvalue window must be positive");
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  return seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(restart + 1);
}

// Vertices held at zero for one step: the exclusion mask, plus void vertices
// that either push outward or have no neighbour carrying material. Lifting a
// detached void vertex by even ~eps^2 creates a spurious low mode.
std::vector<bool> frozen_set(const AscentProblem& problem, const DensityOptConfig& cfg,
                             const std::vector<double>& rho, const Eigen::VectorXd& dir) {
  const int n = static_cast<int>(rho.size());
  std::vector<bool> frozen(n, false);
  for (int i = 0; i < n; ++i) {
    if (!cfg.exclusion_mask.empty() && cfg.exclusion_mask[i]) {
      frozen[i] = true;
      continue;
    }
    if (rho[i] > cfg.void_threshold || cfg.void_threshold <= 0.0) continue;
    if (dir[i] <= 0.0) {
      frozen[i] = true;
      continue;
    }
    if (problem.adjacency_start.empty()) continue;
    bool supported = false;
    for (int s = problem.adjacency_start[i]; s < problem.adjacency_start[i + 1]; ++s) {
      supported = supported || rho[problem.adjacency[s]] >= cfg.support_threshold;
    }
    frozen[i] = !supported;
  }
  return frozen;
}

}  // namespace

AscentOutcome projected_ascent(const AscentProblem& problem, const DensityOptConfig& cfg,
                               std::vector<double> start, int restart, OptTrace& trace) {
  const Eigen::VectorXd& g = problem.mass_vector;
  const int k = cfg.k;
  std::vector<double> rho = project_feasible(start, g, cfg.target_mass, cfg.exclusion_mask);

  auto evaluate = [&](const std::vector<double>& x, int iteration) {
    try {
      SpectralPoint pt = problem.evaluate(x);
      if (static_cast<int>(pt.eigenvalues.size()) <= k) {
        throw SizeError("spectral evaluator returned too few eigenvalues");
      }
      return pt;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("restart " + std::to_string(restart) + ", iteration " +
                                 std::to_string(iteration) + ": " + e.what(),
                             e.best_residuals());
    }
  };

  SpectralPoint cur = evaluate(rho, 0);
  int m = cluster_size(cur.eigenvalues, k, cluster_gap(cfg, cur.eigenvalues[k]));
  double f_cur = objective_fixed(cur.eigenvalues, k, m, cfg.p);

  auto record = [&](int iteration, double f_start, double f, double step) {
    OptRecord r;
    r.restart = restart;
    r.iteration = iteration;
    r.objective = f;
    r.objective_start = f_start;
    r.eigenvalues.assign(cur.eigenvalues.begin() + k,
                         cur.eigenvalues.begin() + std::min<int>(k + m, cur.eigenvalues.size()));
    r.mass = density_mass(rho, g);
    r.step = step;
    r.cluster = m;
    if (cfg.observer) cfg.observer(r);
    trace.records.push_back(std::move(r));
  };
  record(0, f_cur, f_cur, 0.0);

  double step = -1.0;
  int stalled = 0;
  std::vector<double> prev_rho;
  Eigen::VectorXd prev_dir;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const int last = std::min<int>(k + m, cur.eigenvalues.size());
    std::vector<double> vals(cur.eigenvalues.begin() + k, cur.eigenvalues.begin() + last);
    std::vector<Eigen::VectorXd> grads;
    for (int i = k; i < last; ++i) grads.push_back(cur.gradient(i));
    Eigen::VectorXd dir = smoothed_min_gradient(vals, grads, cfg.p);
    // diagonal metric of this step: gradient and projection both use it
    std::vector<double> metric(rho.size(), 1.0);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (cfg.lumped_metric) metric[i] /= g[static_cast<Eigen::Index>(i)];
      if (cfg.affine_scaling) metric[i] *= rho[i] + cfg.affine_floor;
      dir[static_cast<Eigen::Index>(i)] *= metric[i];
    }
    if (!cfg.affine_scaling && !cfg.lumped_metric) metric.clear();
    const std::vector<bool> step_mask = frozen_set(problem, cfg, rho, dir);
    for (int i = 0; i < dir.size(); ++i)
      if (step_mask[i]) dir[i] = 0.0;
    const double dmax = dir.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0)) break;
    if (step < 0.0) step = cfg.initial_step / dmax;
    if (cfg.spectral_step && !prev_rho.empty()) {
      // Barzilai-Borwein length from the last accepted pair
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) {
        const double s_i = rho[i] - prev_rho[i];
        ss += s_i * s_i;
        sy -= s_i * (dir[i] - prev_dir[i]);
      }
      if (sy > 0.0) step = ss / sy;
    }
    // the largest single-entry move stays within [1e-6, 1e3] * initial_step
    step = std::clamp(step, 1e-6 * cfg.initial_step / dmax, 1e3 * cfg.initial_step / dmax);

    bool accepted = false;
    std::vector<double> trial(rho.size());
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      std::vector<double> raw(rho.size());
      for (std::size_t i = 0; i < rho.size(); ++i) raw[i] = rho[i] + step * dir[i];
      trial = project_feasible_weighted(raw, g, cfg.target_mass, step_mask, metric);
      double change = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) change = std::max(change, std::abs(trial[i] - rho[i]));
      if (change < 1e-12) break;
      SpectralPoint next = evaluate(trial, it);
      const double f_next = objective_fixed(next.eigenvalues, k, m, cfg.p);
      if (f_next > f_cur) {
        const double f_start = f_cur;
        stalled = (f_next - f_cur) < cfg.rel_tol * std::abs(f_cur) ? stalled + 1 : 0;
        prev_rho = std::move(rho);
        prev_dir = dir;
        rho = std::move(trial);
        cur = std::move(next);
        record(it, f_start, f_next, step);
        step *= cfg.step_grow;
        accepted = true;
        break;
      }
      step *= cfg.step_shrink;
    }
    if (!accepted || stalled >= cfg.stall_iters) break;
    m = cluster_size(cur.eigenvalues, k, cluster_gap(cfg, cur.eigenvalues[k]));
    f_cur = objective_fixed(cur.eigenvalues, k, m, cfg.p);
  }
  return {rho, cur.eigenvalues, f_cur};
}

AscentOutcome multistart_ascent(const AscentProblem& problem, const DensityOptConfig& config,
                                OptTrace& trace) {
  validate(config, problem.mass_vector);
  const int n = static_cast<int>(problem.mass_vector.size());
  if (!config.exclusion_mask.empty() && static_cast<int>(config.exclusion_mask.size()) != n) {
    throw StructuralError("exclusion mask length does not match the mesh");
  }
  std::optional<AscentOutcome> best;
  for (int r = 0; r < config.restarts; ++r) {
    std::vector<double> start(n);
    if (r == 0 && config.initial_density) {
      if (static_cast<int>(config.initial_density->size()) != n) {
        throw StructuralError("initial density length does not match the mesh");
      }
      start = *config.initial_density;
    } else {
      std::mt19937_64 rng(restart_seed(config.seed, r));
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      for (double& v : start) v = uni(rng);
    }
    AscentOutcome out = projected_ascent(problem, config, std::move(start), r, trace);
    if (!best || out.eigenvalues[config.k] > best->eigenvalues[config.k]) {
      best = std::move(out);
      trace.best_restart = r;
    }
  }
  trace.final_values = best->density;
  trace.final_eigenvalues = best->eigenvalues;
  return *best;
}

SpectralEvaluator surface_evaluator(const SurfaceMesh& mesh, double epsilon, int count,
                                    double tol) {
  // Eigenvectors of the previous call seed the next solve.
  auto warm = std::make_shared<std::optional<Eigen::MatrixXd>>();
  return [mesh, epsilon, count, tol, warm](std::span<const double> rho) {
    DensityField field(mesh, std::vector<double>(rho.begin(), rho.end()));
    auto sys = std::make_shared<SparseSymSystem>(assemble_system(mesh, field, epsilon));
    EigOptions opt;
    opt.count = count;
    opt.tol = tol;
    opt.initial = *warm;
    auto res = std::make_shared<EigenResult>(solve_smallest(sys->stiffness, sys->mass, opt));
    *warm = res->eigenvectors;
    SpectralPoint pt;
    pt.eigenvalues = res->eigenvalues;
    pt.gradient = [mesh, sys, res](int i) {
      const Eigen::VectorXd u = res->eigenvectors.col(i);
      const double ukU = u.dot(sys->mass * u);
      return eigenvalue_gradient_unchecked(mesh, res->eigenvalues[i], u, ukU);
    };
    return pt;
  };
}

DensityOptResult optimize_density(const SurfaceMesh& mesh, const DensityOptConfig& config) {
  AscentProblem problem;
  problem.mass_vector = mass_vector(mesh);
  problem.adjacency_start = mesh.pattern().row_start;
  problem.adjacency = mesh.pattern().columns;
  problem.evaluate =
      surface_evaluator(mesh, config.epsilon, config.k + 1 + config.eig_window, config.eig_tol);
  OptTrace trace;
  AscentOutcome best = multistart_ascent(problem, config, trace);
  std::vector<double> values = best.density;
  // projection arithmetic can leave values a hair outside the box
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
  return {DensityField(mesh, std::move(values)), std::move(trace)};
}

StrichartzAudit strichartz_audit(double area, double mu_k, int k) {
  StrichartzAudit a;
  a.product = area * mu_k;
  a.bound = 2.0 * std::numbers::pi * k * k;
  a.ok = a.product <= a.bound * (1.0 + 1e-6);
  return a;
}

}  // namespace neumann

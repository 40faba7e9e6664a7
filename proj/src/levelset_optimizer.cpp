#include "neumann/levelset_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include <Eigen/SparseCholesky>

#include "neumann/eig_solver.hpp"
#include "neumann/errors.hpp"
#include "neumann/fem_assembly.hpp"

namespace neumann {

LevelSetField::LevelSetField(const SurfaceMesh& mesh, std::vector<double> phi, double sigma_s,
                             int redistance_period)
    : phi_(std::move(phi)), sigma_(sigma_s), period_(redistance_period), mesh_id_(mesh.id()) {
  if (static_cast<int>(phi_.size()) != mesh.num_vertices()) {
    throw StructuralError("level-set length does not match the mesh");
  }
  if (!(sigma_ > 0.0)) throw DomainError("level-set smoothing must be positive");
  if (period_ < 1) throw SizeError("redistance period must be positive");
  for (double v : phi_) {
    if (!std::isfinite(v)) throw DomainError("level-set values must be finite");
  }
}

LevelSetField LevelSetField::with_values(std::vector<double> phi) const {
  LevelSetField out = *this;
  if (phi.size() != phi_.size()) throw StructuralError("level-set length changed");
  for (double v : phi) {
    if (!std::isfinite(v)) throw DomainError("level-set values must be finite");
  }
  out.phi_ = std::move(phi);
  return out;
}

namespace {

void check_mesh(const SurfaceMesh& mesh, const LevelSetField& ls) {
  if (ls.mesh_id() != mesh.id()) throw StructuralError("level set is not defined on this mesh");
}

// (sum_T A_T f_T) / (sum_T A_T) over the triangles around each vertex.
std::vector<double> nodal_average(const SurfaceMesh& mesh, const std::vector<double>& per_tri) {
  std::vector<double> out(mesh.num_vertices(), 0.0);
  std::vector<double> weight(mesh.num_vertices(), 0.0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.triangle_area(t);
    for (int v : mesh.triangle(t)) {
      out[v] += a * per_tri[t];
      weight[v] += a;
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) out[v] /= weight[v];
  return out;
}

std::vector<double> triangle_gradient_sq(const SurfaceMesh& mesh, const double* f) {
  std::vector<double> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const auto& g = mesh.basis_gradients(t);
    out[t] = (f[tri[0]] * g[0] + f[tri[1]] * g[1] + f[tri[2]] * g[2]).squaredNorm();
  }
  return out;
}

// Factorization of alpha M1 + K1, reused across steps.
class VelocitySmoother {
 public:
  VelocitySmoother(const SurfaceMesh& mesh, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    const SparseSymSystem plain = assemble_plain(mesh);
    mass_ = plain.mass;
    Eigen::SparseMatrix<double> a = (alpha * plain.stiffness + plain.mass);
    solver_.compute(a);
    if (solver_.info() != Eigen::Success) throw NumericalError("velocity smoother factorization failed");
  }

  std::vector<double> apply(std::span<const double> raw) const {
    const Eigen::Map<const Eigen::VectorXd> r(raw.data(), static_cast<Eigen::Index>(raw.size()));
    const Eigen::VectorXd rhs = mass_ * r;
    const Eigen::VectorXd w = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success || !w.allFinite()) {
      throw NumericalError("velocity smoother solve failed");
    }
    return {w.data(), w.data() + w.size()};
  }

 private:
  SparseMatrix mass_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

struct Evaluation {
  CostVelocity cv;
  Eigen::MatrixXd vectors;
};

Evaluation evaluate(const SurfaceMesh& mesh, const LevelSetField& ls, const LevelSetConfig& cfg,
                    const Eigen::MatrixXd* warm) {
  check_mesh(mesh, ls);
  if (cfg.k < 1) throw DomainError("k must be at least 1");
  const DensityField rho = smoothed_indicator(mesh, ls);
  const SparseSymSystem sys = assemble_system(mesh, rho, cfg.epsilon);
  EigOptions opt;
  opt.count = cfg.k + 1 + cfg.eig_window;
  opt.tol = cfg.eig_tol;
  if (warm != nullptr) opt.initial = *warm;
  EigenResult res = solve_smallest(sys.stiffness, sys.mass, opt);

  Evaluation out;
  CostVelocity& cv = out.cv;
  const Eigen::VectorXd& g = sys.mass_vector;
  cv.area = rho.mass({g.data(), static_cast<std::size_t>(g.size())});
  cv.eigenvalues = res.eigenvalues;
  const int k = cfg.k;
  cv.cluster = cluster_size(cv.eigenvalues, k, cfg.cluster_rel_gap * cv.eigenvalues[k]);
  const std::vector<double> vals(cv.eigenvalues.begin() + k,
                                 cv.eigenvalues.begin() + k + cv.cluster);
  cv.mu = smoothed_min(vals, cfg.p);

  const int n = mesh.num_vertices();
  std::vector<double> shape(n, 0.0);
  for (int i = 0; i < cv.cluster; ++i) {
    const double weight = cv.cluster == 1 ? 1.0 : std::pow(cv.mu / vals[i], cfg.p + 1.0);
    const Eigen::VectorXd u = res.eigenvectors.col(k + i);
    const std::vector<double> grad2 = nodal_average(mesh, triangle_gradient_sq(mesh, u.data()));
    for (int v = 0; v < n; ++v) shape[v] += weight * (grad2[v] - vals[i] * u[v] * u[v]);
  }
  const double penalty = cv.area - cfg.target_area;
  cv.J = cv.area * cv.mu - cfg.b * penalty * penalty;
  cv.v.resize(n);
  for (int v = 0; v < n; ++v) cv.v[v] = cv.area * shape[v] + (cv.mu - 2.0 * cfg.b * penalty);
  out.vectors = std::move(res.eigenvectors);
  return out;
}

// Minimum over P on segment [a, b] of d(P) + |P - c|, with d linear between
// da and db: the first-order eikonal update across one triangle.
double triangle_update(const Vec3& a, const Vec3& b, const Vec3& c, double da, double db) {
  const Vec3 e = b - a;
  const Vec3 w = c - a;
  double best = std::min(da + w.norm(), db + (c - b).norm());
  const double l2 = e.squaredNorm();
  const double delta = db - da;
  if (delta * delta >= l2) return best;
  const double ew = e.dot(w);
  const double h2 = std::max(0.0, l2 * w.squaredNorm() - ew * ew);
  const double s = -(delta >= 0.0 ? 1.0 : -1.0) * std::abs(delta) * std::sqrt(h2 / (l2 - delta * delta));
  const double t = (s + ew) / l2;
  if (t > 0.0 && t < 1.0) best = std::min(best, da + t * delta + (a + t * e - c).norm());
  return best;
}

double point_segment_distance(const Vec3& p, const Vec3& q0, const Vec3& q1) {
  const Vec3 d = q1 - q0;
  const double l2 = d.squaredNorm();
  double t = l2 > 0.0 ? (p - q0).dot(d) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (q0 + t * d - p).norm();
}

// Copies the velocity of the nearest interface vertex (graph distance along
// edges) to every other vertex. Interface vertices are those of triangles
// crossed by the zero set.
std::vector<double> extend_from_interface(const SurfaceMesh& mesh, const LevelSetField& ls,
                                          const std::vector<double>& v) {
  const int n = mesh.num_vertices();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<double> out = v;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const int neg = (ls[tri[0]] < 0.0) + (ls[tri[1]] < 0.0) + (ls[tri[2]] < 0.0);
    if (neg == 0 || neg == 3) continue;
    for (int i : tri)
      if (dist[i] > 0.0) {
        dist[i] = 0.0;
        heap.emplace(0.0, i);
      }
  }
  if (heap.empty()) return out;
  const SparsityPattern& pat = mesh.pattern();
  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    heap.pop();
    if (d > dist[i]) continue;
    for (int s = pat.row_start[i]; s < pat.row_start[i + 1]; ++s) {
      const int j = pat.columns[s];
      const double nd = d + (mesh.vertex(j) - mesh.vertex(i)).norm();
      if (nd < dist[j]) {
        dist[j] = nd;
        out[j] = out[i];
        heap.emplace(nd, j);
      }
    }
  }
  return out;
}

}  // namespace

LevelSetField init_random_levelset(const SurfaceMesh& mesh, int p, int q, std::uint64_t seed,
                                   double sigma_s, int redistance_period) {
  if (p < 0 || q < 0) throw SizeError("trigonometric degrees must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::array<double, 2>> coeff;
  for (int j = 0; j <= p; ++j)
    for (int l = 0; l <= q; ++l) coeff.push_back({normal(rng), normal(rng)});

  std::vector<double> phi(mesh.num_vertices(), 0.0);
  double peak = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto [s, t] = mesh.surface_parameters(v);
    std::size_t c = 0;
    for (int j = 0; j <= p; ++j)
      for (int l = 0; l <= q; ++l, ++c) {
        const double arg = j * s + l * t;
        phi[v] += coeff[c][0] * std::cos(arg) - coeff[c][1] * std::sin(arg);
      }
    peak = std::max(peak, std::abs(phi[v]));
  }
  if (peak > 0.0)
    for (double& x : phi) x /= peak;
  return LevelSetField(mesh, std::move(phi), sigma_s, redistance_period);
}

DensityField smoothed_indicator(const SurfaceMesh& mesh, const LevelSetField& ls) {
  check_mesh(mesh, ls);
  const double s = ls.sigma();
  std::vector<double> rho(ls.size());
  for (int i = 0; i < ls.size(); ++i) {
    const double x = ls[i];
    rho[i] = std::clamp(0.5 * (1.0 - x / std::sqrt(x * x + s * s)), 0.0, 1.0);
  }
  return DensityField(mesh, std::move(rho));
}

CostVelocity cost_and_velocity(const SurfaceMesh& mesh, const LevelSetField& ls,
                               const LevelSetConfig& config) {
  return evaluate(mesh, ls, config, nullptr).cv;
}

std::vector<double> regularize_velocity(const SurfaceMesh& mesh, std::span<const double> raw_v,
                                        double alpha) {
  if (static_cast<int>(raw_v.size()) != mesh.num_vertices()) {
    throw StructuralError("velocity length does not match the mesh");
  }
  return VelocitySmoother(mesh, alpha).apply(raw_v);
}

std::vector<double> nodal_gradient_norm(const SurfaceMesh& mesh, std::span<const double> phi) {
  std::vector<double> norms = triangle_gradient_sq(mesh, phi.data());
  for (double& x : norms) x = std::sqrt(x);
  return nodal_average(mesh, norms);
}

LevelSetField advect(const SurfaceMesh& mesh, const LevelSetField& ls, std::span<const double> v,
                     double dt) {
  check_mesh(mesh, ls);
  if (static_cast<int>(v.size()) != ls.size()) throw StructuralError("velocity length mismatch");
  if (!(dt >= 0.0)) throw DomainError("time step must be nonnegative");
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  if (dt == 0.0 || vmax == 0.0) return ls;
  const double dt_max = 0.5 * mesh.min_edge_length() / vmax;
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt / dt_max)));
  const double dt_sub = dt / substeps;
  std::vector<double> phi(ls.values().begin(), ls.values().end());
  for (int s = 0; s < substeps; ++s) {
    const std::vector<double> grad = nodal_gradient_norm(mesh, phi);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= dt_sub * v[i] * grad[i];
  }
  return ls.with_values(std::move(phi));
}

RedistanceResult redistance(const SurfaceMesh& mesh, const LevelSetField& ls) {
  check_mesh(mesh, ls);
  const int n = mesh.num_vertices();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kInf);
  auto negative = [&](int v) { return ls[v] < 0.0; };

  bool interface = false;
  for (int v = 0; v < n; ++v)
    if (ls[v] == 0.0) {
      dist[v] = 0.0;
      interface = true;
    }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    std::vector<Vec3> cross;
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      if (negative(a) == negative(b)) continue;
      const double s = ls[a] / (ls[a] - ls[b]);
      cross.push_back(mesh.vertex(a) + s * (mesh.vertex(b) - mesh.vertex(a)));
    }
    if (cross.size() < 2) continue;
    interface = true;
    for (int v : tri) {
      dist[v] = std::min(dist[v], point_segment_distance(mesh.vertex(v), cross[0], cross[1]));
    }
  }
  if (!interface) return {ls, false};

  // 0 far, 1 trial, 2 accepted
  std::vector<char> state(n, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int v = 0; v < n; ++v)
    if (dist[v] < kInf) state[v] = 2;

  const SparsityPattern& pat = mesh.pattern();
  auto relax = [&](int c) {
    double best = dist[c];
    for (int t : mesh.vertex_triangles(c)) {
      const Triangle& tri = mesh.triangle(t);
      int others[2], k = 0;
      for (int v : tri)
        if (v != c) others[k++] = v;
      const int a = others[0], b = others[1];
      const bool ka = state[a] == 2, kb = state[b] == 2;
      if (ka && kb) {
        best = std::min(best, triangle_update(mesh.vertex(a), mesh.vertex(b), mesh.vertex(c),
                                              dist[a], dist[b]));
      } else if (ka) {
        best = std::min(best, dist[a] + (mesh.vertex(c) - mesh.vertex(a)).norm());
      } else if (kb) {
        best = std::min(best, dist[b] + (mesh.vertex(c) - mesh.vertex(b)).norm());
      }
    }
    if (best < dist[c]) {
      dist[c] = best;
      state[c] = 1;
      heap.emplace(best, c);
    }
  };
  auto relax_neighbours = [&](int v) {
    for (int s = pat.row_start[v]; s < pat.row_start[v + 1]; ++s) {
      const int c = pat.columns[s];
      if (state[c] != 2) relax(c);
    }
  };
  for (int v = 0; v < n; ++v)
    if (state[v] == 2) relax_neighbours(v);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (state[v] == 2 || d > dist[v]) continue;
    state[v] = 2;
    relax_neighbours(v);
  }

  std::vector<double> phi(n);
  for (int v = 0; v < n; ++v) phi[v] = negative(v) ? -dist[v] : dist[v];
  return {ls.with_values(std::move(phi)), true};
}

double domain_area(const SurfaceMesh& mesh, const LevelSetField& ls) {
  check_mesh(mesh, ls);
  double area = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const double a = mesh.triangle_area(t);
    int neg = 0;
    for (int v : tri) neg += ls[v] < 0.0;
    if (neg == 0) continue;
    if (neg == 3) {
      area += a;
      continue;
    }
    // the lone vertex on the minority side cuts off a similar sub-triangle
    const bool lone_negative = neg == 1;
    int lone = 0;
    for (int i = 0; i < 3; ++i)
      if ((ls[tri[i]] < 0.0) == lone_negative) lone = i;
    const double f0 = ls[tri[lone]];
    const double f1 = ls[tri[(lone + 1) % 3]];
    const double f2 = ls[tri[(lone + 2) % 3]];
    const double corner = a * (f0 / (f0 - f1)) * (f0 / (f0 - f2));
    area += lone_negative ? corner : a - corner;
  }
  return area;
}

LevelSetResult optimize_levelset(const SurfaceMesh& mesh, const LevelSetConfig& cfg) {
  if (cfg.k < 1) throw DomainError("k must be at least 1");
  if (!(cfg.epsilon > 0.0 && cfg.sigma_s > 0.0 && cfg.gamma > 0.0 && cfg.b > 0.0)) {
    throw DomainError("epsilon, sigma, gamma and b must be positive");
  }
  if (!(cfg.target_area > 0.0 && cfg.target_area < total_area(mesh))) {
    throw DomainError("target area must lie in (0, total area)");
  }
  if (cfg.n_steps < 0 || cfg.adaptive_steps < 0 || cfg.restarts < 1) {
    throw SizeError("step counts must be nonnegative and restarts positive");
  }
  std::optional<VelocitySmoother> smoother;
  if (cfg.regularize) smoother.emplace(mesh, cfg.alpha);
  auto smooth = [&](const LevelSetField& f, const std::vector<double>& raw) {
    const std::vector<double> v = extend_from_interface(mesh, f, raw);
    return smoother ? smoother->apply(v) : v;
  };
  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  OptTrace trace;
  std::optional<LevelSetField> best_field;
  std::optional<Evaluation> best_eval;

  for (int r = 0; r < cfg.restarts; ++r) {
    const std::uint64_t seed = cfg.seed + 7919ULL * static_cast<std::uint64_t>(r);
    LevelSetField ls =
        (r == 0 && cfg.initial_phi)
            ? LevelSetField(mesh, *cfg.initial_phi, cfg.sigma_s, cfg.redistance_period)
            : init_random_levelset(mesh, cfg.trig_p, cfg.trig_q, seed, cfg.sigma_s,
                                   cfg.redistance_period);
    std::optional<Evaluation> cur;
    int step = 0;
    double previous_J = 0.0;

    auto record = [&](const Evaluation& e, double dt) {
      OptRecord rec;
      rec.restart = r;
      rec.iteration = step;
      rec.objective = e.cv.J;
      rec.objective_start = step == 0 ? e.cv.J : previous_J;
      rec.eigenvalues.assign(e.cv.eigenvalues.begin() + cfg.k,
                             e.cv.eigenvalues.begin() + cfg.k + e.cv.cluster);
      rec.mass = e.cv.area;
      rec.step = dt;
      rec.cluster = e.cv.cluster;
      if (cfg.observer) cfg.observer(rec);
      trace.records.push_back(std::move(rec));
      previous_J = e.cv.J;
      if (!best_eval || e.cv.J > best_eval->cv.J) {
        best_eval = e;
        best_field = ls;
        trace.best_restart = r;
      }
    };
    auto run_eval = [&](const LevelSetField& f) {
      return evaluate(mesh, f, cfg, cur ? &cur->vectors : nullptr);
    };
    auto maybe_redistance = [&](LevelSetField f) {
      if (step % f.redistance_period() == 0) return redistance(mesh, f).field;
      return f;
    };

    try {
      cur = run_eval(ls);
      record(*cur, 0.0);
      for (int i = 0; i < cfg.n_steps; ++i) {
        const std::vector<double> v = smooth(ls, cur->cv.v);
        const double vmax = inf_norm(v);
        if (vmax == 0.0) break;
        const double dt = cfg.gamma / vmax;
        ++step;
        ls = maybe_redistance(advect(mesh, ls, v, dt));
        cur = run_eval(ls);
        record(*cur, dt);
      }
      std::vector<double> v = smooth(ls, cur->cv.v);
      double dt = inf_norm(v) > 0.0 ? cfg.gamma / inf_norm(v) : 0.0;
      for (int i = 0; i < cfg.adaptive_steps && dt >= cfg.min_dt; ++i) {
        ++step;
        LevelSetField trial = maybe_redistance(advect(mesh, ls, v, dt));
        Evaluation next = run_eval(trial);
        if (next.cv.J >= cur->cv.J) {
          ls = std::move(trial);
          cur = std::move(next);
          record(*cur, dt);
          v = smooth(ls, cur->cv.v);
          dt *= 1.1;
        } else {
          dt *= 0.5;
        }
      }
    } catch (const Error& e) {
      trace.failed = true;
      trace.failure = "restart " + std::to_string(r) + ", step " + std::to_string(step) + ": " +
                      e.what();
      if (!best_eval) throw;
    }
  }

  LevelSetResult out{*best_field, std::move(trace), 0.0, 0.0, 0.0, {}, {}};
  out.J = best_eval->cv.J;
  out.area = best_eval->cv.area;
  out.eigenvalues = best_eval->cv.eigenvalues;
  out.mu = out.eigenvalues[cfg.k];
  out.trace.final_values.assign(out.field.values().begin(), out.field.values().end());
  out.trace.final_eigenvalues = out.eigenvalues;
  out.audit = strichartz_audit(out.area, out.mu, cfg.k);
  return out;
}

}  // namespace neumann

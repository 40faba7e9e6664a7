#include "neumann/eig_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace neumann {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using ColMajorSparse = Eigen::SparseMatrix<double>;

double default_shift(const SparseMatrix& m, const SparseMatrix& k) {
  const double trace_m = m.diagonal().sum();
  const double trace_k = k.diagonal().sum();
  if (!(trace_m > 0.0)) return 1e-3;
  return 1e-3 * trace_m / trace_k;
}

void check_mass_diagonal(const SparseMatrix& k) {
  const Vec d = k.diagonal();
  if (!(d.minCoeff() > 0.0)) {
    throw AssemblyContractError("mass matrix is not positive definite (nonpositive diagonal)");
  }
}

// K-orthonormalize the columns of s (SVQB, two passes); near-dependent
// directions are dropped.
Mat svqb(const SparseMatrix& k, const Mat& s, double drop_tol = 1e-12) {
  Mat out = s;
  for (int pass = 0; pass < 2 && out.cols() > 0; ++pass) {
    Mat g = out.transpose() * (k * out);
    g = 0.5 * (g + g.transpose()).eval();
    Vec scale(g.rows());
    for (int i = 0; i < g.rows(); ++i) scale[i] = g(i, i) > 0.0 ? 1.0 / std::sqrt(g(i, i)) : 0.0;
    const Mat gs = scale.asDiagonal() * g * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(gs);
    const Vec& theta = es.eigenvalues();
    const double top = theta.maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < theta.size(); ++i)
      if (theta[i] > drop_tol * top && theta[i] > 0.0) keep.push_back(i);
    Mat basis(gs.rows(), static_cast<int>(keep.size()));
    for (int c = 0; c < static_cast<int>(keep.size()); ++c)
      basis.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(theta[keep[c]]);
    out = out * scale.asDiagonal() * basis;
  }
  return out;
}

// w <- w - x (x^T K w), twice
void k_orthogonalize_against(const SparseMatrix& k, const Mat& x, Mat& w) {
  if (x.cols() == 0 || w.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w -= x * (x.transpose() * (k * w));
}

Mat initial_block(const SparseMatrix& k, int n, int nb, const EigOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> cols;
  if (opt.include_constant) cols.push_back(Vec::Ones(n));
  if (opt.initial) {
    for (int c = 0; c < opt.initial->cols() && static_cast<int>(cols.size()) < nb; ++c) {
      if (opt.initial->rows() == n) cols.push_back(opt.initial->col(c));
    }
  }
  Mat x;
  for (int attempt = 0; attempt < 4; ++attempt) {
    while (static_cast<int>(cols.size()) < nb) {
      Vec r(n);
      for (int i = 0; i < n; ++i) r[i] = normal(rng);
      cols.push_back(r);
    }
    Mat raw(n, static_cast<int>(cols.size()));
    for (int c = 0; c < raw.cols(); ++c) raw.col(c) = cols[c];
    x = svqb(k, raw);
    if (x.cols() >= nb) break;
    cols.clear();
    for (int c = 0; c < x.cols(); ++c) cols.push_back(x.col(c));
  }
  return x.leftCols(std::min<Eigen::Index>(nb, x.cols()));
}

// Rayleigh-Ritz of the pencil on span(s); returns the lowest `keep` pairs.
void rayleigh_ritz(const Mat& s, const Mat& ms, const Mat& ks, int keep, Vec& values, Mat& coeffs) {
  Mat h = s.transpose() * ms;
  Mat g = s.transpose() * ks;
  h = 0.5 * (h + h.transpose()).eval();
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(h, g);
  if (es.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz projection failed");
  const int k = std::min<int>(keep, static_cast<int>(s.cols()));
  values = es.eigenvalues().head(k);
  coeffs = es.eigenvectors().leftCols(k);
}

std::vector<double> residual_norms(const SparseMatrix& m, const SparseMatrix& k, const Mat& x,
                                   const Vec& lambda, Mat* r_out = nullptr) {
  const Mat mx = m * x;
  const Mat kx = k * x;
  Mat r = mx - kx * lambda.asDiagonal();
  std::vector<double> res(x.cols());
  for (int i = 0; i < x.cols(); ++i) {
    const double denom = kx.col(i).norm();
    res[i] = denom > 0.0 ? r.col(i).norm() / denom : r.col(i).norm();
  }
  if (r_out) *r_out = std::move(r);
  return res;
}

EigenResult finish(const Vec& lambda, const Mat& x, const std::vector<double>& res, int count,
                   int iterations, SolverPath path, double tol) {
  EigenResult out;
  out.iterations = iterations;
  out.path = path;
  for (int i = 0; i < count; ++i) {
    double mu = lambda[i];
    // M is positive semidefinite; tiny negative Ritz values are rounding
    if (mu < 0.0) {
      const double scale = std::max(1.0, std::abs(lambda[count - 1]));
      if (mu < -std::max(tol, 1e-10) * scale) {
        throw AssemblyContractError("negative eigenvalue " + std::to_string(mu) +
                                    ": stiffness matrix is indefinite");
      }
      mu = 0.0;
    }
    out.eigenvalues.push_back(mu);
    out.residuals.push_back(res[i]);
  }
  out.eigenvectors = x.leftCols(count);
  return out;
}

class ShiftedFactor {
 public:
  ShiftedFactor(const SparseMatrix& m, const SparseMatrix& k, double shift) {
    const ColMajorSparse a = (m + shift * k).eval();
    solver_.compute(a);
    if (solver_.info() != Eigen::Success) {
      throw NumericalError("factorization of the shifted operator failed");
    }
    if (!(solver_.vectorD().minCoeff() > 0.0)) {
      throw AssemblyContractError("shifted operator M + delta K is not positive definite");
    }
  }
  Mat solve(const Mat& rhs) const { return solver_.solve(rhs); }

 private:
  Eigen::SimplicialLDLT<ColMajorSparse> solver_;
};

struct LobpcgOutcome {
  Vec lambda;
  Mat x;
  std::vector<double> res;
  int iterations = 0;
  bool converged = false;
};

LobpcgOutcome lobpcg(const SparseMatrix& m, const SparseMatrix& k, Mat x, int count,
                     const EigOptions& opt, const std::function<Mat(const Mat&)>& precond) {
  const int nb = static_cast<int>(x.cols());
  LobpcgOutcome out;
  Vec lambda;
  Mat c;
  {
    const Mat mx = m * x;
    const Mat kx = k * x;
    rayleigh_ritz(x, mx, kx, nb, lambda, c);
    x = x * c;
  }
  Mat p(x.rows(), 0);
  double reference_worst = std::numeric_limits<double>::infinity();
  int reference_iter = 0;
  std::vector<double> best_res(count, std::numeric_limits<double>::infinity());

  for (int it = 0; it < opt.max_iters; ++it) {
    Mat r;
    const std::vector<double> res = residual_norms(m, k, x, lambda, &r);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
      worst = std::max(worst, res[i]);
      best_res[i] = std::min(best_res[i], res[i]);
    }
    out.iterations = it;
    if (worst <= opt.tol) {
      out.converged = true;
      out.lambda = lambda;
      out.x = x;
      out.res = res;
      return out;
    }
    if (worst < 0.5 * reference_worst) {
      reference_worst = worst;
      reference_iter = it;
    } else if (it - reference_iter > opt.stall_window) {
      break;
    }

    Mat w = precond(r);
    k_orthogonalize_against(k, x, w);
    k_orthogonalize_against(k, x, p);
    Mat wp(x.rows(), w.cols() + p.cols());
    wp << w, p;
    const Mat q = svqb(k, wp);
    if (q.cols() == 0) break;

    Mat s(x.rows(), nb + q.cols());
    s << x, q;
    const Mat ms = m * s;
    const Mat ks = k * s;
    rayleigh_ritz(s, ms, ks, nb, lambda, c);
    x = s * c;
    p = q * c.bottomRows(q.cols());
  }
  out.lambda = lambda;
  out.x = x;
  out.res = residual_norms(m, k, x, lambda);
  return out;
}

LobpcgOutcome block_krylov(const SparseMatrix& m, const SparseMatrix& k, const Mat& start,
                           int count, const EigOptions& opt, const ShiftedFactor& factor) {
  const int nb = static_cast<int>(start.cols());
  const int n = static_cast<int>(start.rows());
  LobpcgOutcome out;
  Mat block = svqb(k, start);
  int steps = 6;
  for (int restart = 0; restart < 30; ++restart) {
    std::vector<Mat> blocks{block};
    Mat basis = block;
    for (int s = 0; s < steps && basis.cols() < n; ++s) {
      Mat y = factor.solve(k * blocks.back());
      k_orthogonalize_against(k, basis, y);
      y = svqb(k, y);
      if (y.cols() == 0) break;
      Mat grown(n, basis.cols() + y.cols());
      grown << basis, y;
      basis = std::move(grown);
      blocks.push_back(std::move(y));
    }
    Vec lambda;
    Mat c;
    rayleigh_ritz(basis, m * basis, k * basis, nb, lambda, c);
    Mat x = basis * c;
    std::vector<double> res = residual_norms(m, k, x, lambda);
    out.iterations += static_cast<int>(blocks.size());
    out.lambda = lambda;
    out.x = x;
    out.res = res;
    bool ok = true;
    for (int i = 0; i < count; ++i) ok = ok && res[i] <= opt.tol;
    if (ok) {
      out.converged = true;
      return out;
    }
    block = svqb(k, x);
    steps = std::min(2 * steps, 64);
  }
  return out;
}

}  // namespace

EigenResult solve_dense(const SparseMatrix& stiffness, const SparseMatrix& mass, int count) {
  const int n = static_cast<int>(stiffness.rows());
  if (count < 1 || count > n) throw SizeError("requested eigenpair count out of range");
  const Mat md = Mat(stiffness);
  const Mat kd = Mat(mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(md, kd);
  if (es.info() != Eigen::Success) {
    throw AssemblyContractError("dense generalized solve failed: mass matrix is not positive definite");
  }
  const Vec lambda = es.eigenvalues().head(count);
  const Mat x = es.eigenvectors().leftCols(count);
  const std::vector<double> res = residual_norms(stiffness, mass, x, lambda);
  return finish(lambda, x, res, count, 0, SolverPath::Dense, 1e-9);
}

EigenResult solve_smallest(const SparseSymSystem& system, int count, double tol) {
  EigOptions opt;
  opt.count = count;
  opt.tol = tol;
  return solve_smallest(system.stiffness, system.mass, opt);
}

EigenResult solve_smallest(const SparseMatrix& stiffness, const SparseMatrix& mass,
                           const EigOptions& opt) {
  const int n = static_cast<int>(stiffness.rows());
  const int count = opt.count;
  if (count < 1) throw SizeError("eigenpair count must be positive");
  if (stiffness.rows() != stiffness.cols() || mass.rows() != n || mass.cols() != n) {
    throw StructuralError("stiffness and mass matrices must be square and of equal size");
  }
  if (count > n) throw SizeError("more eigenpairs requested than the problem dimension");
  check_mass_diagonal(mass);

  if (n <= opt.dense_threshold || 4 * count >= n) return solve_dense(stiffness, mass, count);

  const int nb = std::min(n / 2, count + std::max(0, opt.guard));
  const double shift = default_shift(stiffness, mass);
  std::optional<ShiftedFactor> factor;
  std::function<Mat(const Mat&)> precond;
  if (opt.preconditioner == Preconditioner::Factorized || opt.force_block_krylov) {
    factor.emplace(stiffness, mass, shift);
  }
  if (opt.preconditioner == Preconditioner::Factorized) {
    precond = [&factor](const Mat& r) { return factor->solve(r); };
  } else {
    const Vec inv_diag = (stiffness.diagonal() + shift * mass.diagonal()).cwiseInverse();
    precond = [inv_diag](const Mat& r) { return Mat(inv_diag.asDiagonal() * r); };
  }

  const Mat x0 = initial_block(mass, n, nb, opt);
  LobpcgOutcome run;
  SolverPath path = SolverPath::Lobpcg;
  Mat restart_block = x0;
  if (!opt.force_block_krylov) {
    run = lobpcg(stiffness, mass, x0, count, opt, precond);
    restart_block = run.x;
  }
  if (!run.converged) {
    if (!factor) factor.emplace(stiffness, mass, shift);
    const int lobpcg_iters = run.iterations;
    run = block_krylov(stiffness, mass, restart_block, count, opt, *factor);
    run.iterations += lobpcg_iters;
    path = SolverPath::BlockKrylov;
  }
  if (!run.converged) {
    std::vector<double> best(run.res.begin(), run.res.begin() + count);
    throw ConvergenceError("eigensolver did not reach tolerance " + std::to_string(opt.tol), best);
  }
  return finish(run.lambda, run.x, run.res, count, run.iterations, path, opt.tol);
}

}  // namespace neumann

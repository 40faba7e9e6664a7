// Command-line driver for the density, latitude and level-set optimizers.
//
// Every subcommand accepts `--config FILE` with flat `key=value` lines, keys
// named like the long options. Options given on the command line win over the
// file. Exit status: 0 success, 1 numerical failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "neumann/axisymmetric_1d.hpp"
#include "neumann/density_optimizer.hpp"
#include "neumann/errors.hpp"
#include "neumann/levelset_optimizer.hpp"
#include "neumann/medit_io.hpp"
#include "neumann/surface_mesh.hpp"
#include "neumann/trace_io.hpp"

namespace fs = std::filesystem;
using namespace neumann;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

struct SurfaceOptions {
  std::string surface = "sphere";
  int subdiv = 4;
  double major = 2.0;
  double minor = 1.0;
  int nu = 64;
  int nv = 32;

  void add_to(CLI::App* app) {
    app->add_option("--surface", surface, "sphere or torus")->check(CLI::IsMember({"sphere", "torus"}));
    app->add_option("--subdiv", subdiv, "icosphere subdivision level");
    app->add_option("--torus-R", major, "torus major radius");
    app->add_option("--torus-r", minor, "torus minor radius");
    app->add_option("--nu", nu, "torus steps around the axis");
    app->add_option("--nv", nv, "torus steps around the tube");
  }

  void validate() const {
    if (surface == "sphere") {
      require(subdiv >= 0 && subdiv <= kMaxIcosphereSubdivisions, "--subdiv out of range");
    } else {
      require(minor > 0.0 && major > minor, "torus needs 0 < r < R");
      require(nu >= 3 && nv >= 3, "torus needs nu, nv >= 3");
    }
  }

  SurfaceMesh build(int level_shift = 0) const {
    if (surface == "sphere") return make_icosphere(subdiv + level_shift);
    const int scale = level_shift < 0 ? (1 << -level_shift) : 1;
    return make_torus(major, minor, std::max(3, nu / scale), std::max(3, nv / scale));
  }
};

struct Common {
  std::string out = ".";
  std::string config;
  std::uint64_t seed = 0;

  void add_to(CLI::App* app) {
    app->add_option("--out", out, "output directory");
    app->add_option("--config", config, "key=value configuration file");
    app->add_option("--seed", seed, "random seed");
  }

  fs::path dir() const {
    fs::create_directories(out);
    return fs::path(out);
  }
};

std::string summary_line(double m, double mu, int k) {
  const double bound = 2.0 * std::numbers::pi * k * k / m;
  const StrichartzAudit audit = strichartz_audit(m, mu, k);
  std::ostringstream s;
  s.precision(10);
  s << "m=" << m << " mu_k=" << mu << " bound=" << bound
    << " strichartz=" << (audit.ok ? "ok" : "violated");
  return s.str();
}

// Collects records while a run is in progress so that a failure can still
// leave the partial trace behind.
struct TraceSink {
  OptTrace trace;
  RecordObserver observer() {
    return [this](const OptRecord& r) { trace.records.push_back(r); };
  }
};

struct PartialGuard {
  fs::path target;
  const TraceSink* sink;
  int k;
  bool done = false;

  ~PartialGuard() {
    if (done || sink->trace.records.empty()) return;
    try {
      fs::path partial = target;
      partial += ".partial";
      trace_table(sink->trace, k).write(partial.string());
      std::cerr << "partial trace written to " << partial.string() << '\n';
    } catch (...) {
    }
  }
};

std::vector<bool> north_cap_mask(const SurfaceMesh& mesh, double m) {
  const DensityField cap = geodesic_cap_field(mesh, Vec3(0.0, 0.0, 1.0), m);
  std::vector<bool> mask(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) mask[i] = cap[i] > 0.5;
  return mask;
}

// Latitude density drawn on a sphere mesh for visualization.
std::vector<double> latitude_on_mesh(const LatitudeDensity& rho, const SurfaceMesh& mesh) {
  const int n = rho.elements();
  std::vector<double> out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double theta = std::acos(std::clamp(mesh.vertex(v).z(), -1.0, 1.0));
    const double x = theta / std::numbers::pi * n;
    const int i = std::min(n - 1, static_cast<int>(x));
    const double s = x - i;
    out[v] = (1.0 - s) * rho[i] + s * rho[i + 1];
  }
  return out;
}

void write_field(const fs::path& dir, const std::string& stem, const SurfaceMesh& mesh,
                 std::span<const double> values) {
  write_medit_mesh(mesh, (dir / (stem + ".mesh")).string());
  write_medit_sol(values, mesh.num_vertices(), (dir / (stem + ".sol")).string());
}

// Evaluates f(0..n-1), concurrently when asked, and returns the results in
// index order.
template <class F>
auto sweep(std::size_t n, bool parallel, F f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out;
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
    return out;
  }
  std::vector<std::future<R>> jobs;
  for (std::size_t i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, f, i));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

// ---------------------------------------------------------------- subcommands

struct MeshCmd {
  Common common;
  SurfaceOptions surf;

  void add(CLI::App& app, std::function<void()>& action) {
    CLI::App* sub = app.add_subcommand("mesh", "generate a surface mesh and export it");
    common.add_to(sub);
    surf.add_to(sub);
    sub->callback([this, &action] { action = [this] { run(); }; });
  }

  void run() {
    surf.validate();
    const SurfaceMesh mesh = surf.build();
    const fs::path dir = common.dir();
    write_medit_mesh(mesh, (dir / "surface.mesh").string());
    std::cout << "vertices=" << mesh.num_vertices() << " triangles=" << mesh.num_triangles()
              << " area=" << format_real(total_area(mesh)) << '\n';
  }
};

struct ReferenceCmd {
  Common common;
  int k = 1;
  std::vector<double> masses{2.0};
  int n_elements = 10000;
  bool parallel = false;

  void add(CLI::App& app, std::function<void()>& action) {
    CLI::App* sub = app.add_subcommand("reference", "cap and union-of-caps reference values");
    common.add_to(sub);
    sub->add_option("--k", k, "eigenvalue index");
    sub->add_option("--masses", masses, "mass sweep")->delimiter(',');
    sub->add_option("--N", n_elements, "latitude cells");
    sub->add_flag("--parallel", parallel, "evaluate the masses concurrently");
    sub->callback([this, &action] { action = [this] { run(); }; });
  }

  void run() {
    require(k >= 1, "--k must be at least 1");
    require(n_elements >= 4, "--N must be at least 4");
    for (double m : masses) require(m > 0.0 && m < 4.0 * std::numbers::pi, "masses must lie in (0, 4 pi)");
    CsvTable table({"m", "mu_cap", "mu_kballs", "strichartz_bound", "strichartz_ok"});
    const auto values = sweep(masses.size(), parallel, [this](std::size_t i) {
      return std::pair{cap_reference_mu1(masses[i], n_elements),
                       union_of_k_balls_mu(masses[i], k, n_elements)};
    });
    for (std::size_t i = 0; i < masses.size(); ++i) {
      const double m = masses[i];
      const auto [cap, balls] = values[i];
      const StrichartzAudit audit = strichartz_audit(m, balls, k);
      table.add_row({format_real(m), format_real(cap), format_real(balls),
                     format_real(audit.bound / m), audit.ok ? "1" : "0"});
      std::cout << summary_line(m, balls, k) << '\n';
    }
    table.write((common.dir() / "reference.csv").string());
  }
};

struct DensityCmd {
  Common common;
  SurfaceOptions surf;
  DensityOptConfig cfg;
  bool exclude_ball = false;
  int coarse_levels = 1;
  int coarse_iters = -1;

  void add(CLI::App& app, std::function<void()>& action) {
    CLI::App* sub = app.add_subcommand("optimize-density", "maximize mu_k over densities");
    common.add_to(sub);
    surf.add_to(sub);
    sub->add_option("--k", cfg.k, "eigenvalue index");
    sub->add_option("--mass", cfg.target_mass, "target mass");
    sub->add_option("--epsilon", cfg.epsilon, "regularization");
    sub->add_option("--p", cfg.p, "smoothing exponent");
    sub->add_option("--iters", cfg.max_iters, "iterations per restart");
    sub->add_option("--restarts", cfg.restarts, "random restarts");
    sub->add_option("--coarse-levels", coarse_levels,
                    "levels below the target mesh for the warm start (0 disables it)");
    sub->add_option("--coarse-iters", coarse_iters, "iterations on the coarse mesh");
    sub->add_option("--cluster-rel-gap", cfg.cluster_rel_gap, "cluster threshold relative to mu_k");
    sub->add_flag("--exclude-ball", exclude_ball, "force rho = 0 on the north cap of area m");
    sub->callback([this, &action] { action = [this] { run(); }; });
  }

  void run() {
    surf.validate();
    require(cfg.k >= 1, "--k must be at least 1");
    require(cfg.epsilon > 0.0 && cfg.p >= 2.0, "--epsilon must be positive and --p at least 2");
    require(cfg.max_iters >= 0 && cfg.restarts >= 1, "bad iteration or restart count");
    require(coarse_levels >= 0, "--coarse-levels must be nonnegative");
    require(cfg.cluster_rel_gap >= 0.0, "--cluster-rel-gap must be nonnegative");
    require(!exclude_ball || surf.surface == "sphere", "--exclude-ball needs the sphere");
    cfg.seed = common.seed;
    const SurfaceMesh mesh = surf.build();
    require(cfg.target_mass > 0.0 && cfg.target_mass < total_area(mesh), "--mass out of range");

    const fs::path dir = common.dir();
    TraceSink sink;
    PartialGuard guard{dir / "trace.csv", &sink, cfg.k};
    cfg.observer = sink.observer();

    const bool warm = coarse_levels > 0 && (surf.surface != "sphere" || surf.subdiv >= coarse_levels);
    if (warm) {
      const SurfaceMesh coarse = surf.build(-coarse_levels);
      DensityOptConfig c = cfg;
      if (exclude_ball) c.exclusion_mask = north_cap_mask(coarse, cfg.target_mass);
      if (coarse_iters >= 0) c.max_iters = coarse_iters;
      const DensityOptResult first = optimize_density(coarse, c);
      std::cout << "coarse " << summary_line(cfg.target_mass, first.trace.final_eigenvalues[cfg.k], cfg.k)
                << '\n';
      cfg.initial_density = transfer_vertex_field(coarse, first.density.values(), mesh);
    }
    if (exclude_ball) cfg.exclusion_mask = north_cap_mask(mesh, cfg.target_mass);
    const DensityOptResult res = optimize_density(mesh, cfg);
    guard.done = true;

    write_field(dir, "density", mesh, res.density.values());
    trace_table(res.trace, cfg.k).write((dir / "trace.csv").string());
    std::cout << summary_line(cfg.target_mass, res.trace.final_eigenvalues[cfg.k], cfg.k) << '\n';
  }
};

struct Density1DCmd {
  Common common;
  DensityOptConfig cfg;
  int n_elements = 400;
  int view_subdiv = 4;

  void add(CLI::App& app, std::function<void()>& action) {
    CLI::App* sub = app.add_subcommand("optimize-density-1d", "axisymmetric density ascent for mu_1");
    common.add_to(sub);
    sub->add_option("--mass", cfg.target_mass, "target mass");
    sub->add_option("--N", n_elements, "latitude cells");
    sub->add_option("--epsilon", cfg.epsilon, "regularization");
    sub->add_option("--iters", cfg.max_iters, "iterations per restart");
    sub->add_option("--restarts", cfg.restarts, "random restarts");
    sub->add_option("--view-subdiv", view_subdiv, "icosphere level of the exported picture");
    sub->callback([this, &action] { action = [this] { run(); }; });
  }

  void run() {
    require(n_elements >= 4, "--N must be at least 4");
    require(cfg.target_mass > 0.0 && cfg.target_mass < 4.0 * std::numbers::pi, "--mass out of range");
    require(cfg.epsilon > 0.0 && cfg.max_iters >= 0 && cfg.restarts >= 1, "bad optimizer settings");
    require(view_subdiv >= 0 && view_subdiv <= kMaxIcosphereSubdivisions, "--view-subdiv out of range");
    cfg.seed = common.seed;
    const fs::path dir = common.dir();
    TraceSink sink;
    PartialGuard guard{dir / "trace.csv", &sink, 1};
    cfg.observer = sink.observer();
    const Density1DResult res = optimize_density_1d(cfg.target_mass, n_elements, cfg);
    guard.done = true;

    CsvTable profile({"theta", "rho"});
    for (int i = 0; i <= n_elements; ++i) {
      profile.add_row({format_real(res.density.theta(i)), format_real(res.density[i])});
    }
    profile.write((dir / "density_1d.csv").string());
    const SurfaceMesh view = make_icosphere(view_subdiv);
    write_field(dir, "density", view, latitude_on_mesh(res.density, view));
    trace_table(res.trace, 1).write((dir / "trace.csv").string());
    std::cout << summary_line(cfg.target_mass, res.trace.final_eigenvalues[1], 1)
              << " dispersion=" << dispersion(res.density) << '\n';
  }
};

struct DispersionCmd {
  Common common;
  DensityOptConfig cfg;
  std::vector<double> masses{2.0, 5.0};
  std::vector<int> grids{100, 200, 400, 800};
  bool parallel = false;

  void add(CLI::App& app, std::function<void()>& action) {
    CLI::App* sub = app.add_subcommand("diagnose-dispersion", "dispersion of 1D optima across grids");
    common.add_to(sub);
    sub->add_option("--masses", masses, "mass sweep")->delimiter(',');
    sub->add_option("--grids", grids, "latitude cell counts, the first is the reference")->delimiter(',');
    sub->add_option("--iters", cfg.max_iters, "iterations per restart");
    sub->add_option("--restarts", cfg.restarts, "random restarts");
    sub->add_flag("--parallel", parallel, "run the masses concurrently");
    sub->callback([this, &action] { action = [this] { run(); }; });
  }

  void run() {
    require(!grids.empty(), "--grids must not be empty");
    for (int n : grids) require(n >= 4, "grid sizes must be at least 4");
    for (double m : masses) require(m > 0.0 && m < 4.0 * std::numbers::pi, "masses must lie in (0, 4 pi)");
    require(cfg.max_iters >= 0 && cfg.restarts >= 1, "bad optimizer settings");
    cfg.seed = common.seed;
    CsvTable table({"m", "N", "mu_1", "h", "dispersion", "strichartz_bound", "strichartz_ok"});
    const auto runs = sweep(masses.size(), parallel, [this](std::size_t i) {
      std::vector<std::pair<double, double>> per_grid;
      for (int n : grids) {
        const Density1DResult res = optimize_density_1d(masses[i], n, cfg);
        per_grid.emplace_back(res.trace.final_eigenvalues[1], dispersion(res.density));
      }
      return per_grid;
    });
    for (std::size_t i = 0; i < masses.size(); ++i) {
      const double m = masses[i];
      const double h0 = runs[i].front().second;
      if (!(h0 > 0.0)) throw DomainError("dispersion of the reference grid is zero");
      for (std::size_t j = 0; j < grids.size(); ++j) {
        const auto [mu, h] = runs[i][j];
        const StrichartzAudit audit = strichartz_audit(m, mu, 1);
        table.add_row({format_real(m), std::to_string(grids[j]), format_real(mu), format_real(h),
                       format_real(h / h0), format_real(audit.bound / m), audit.ok ? "1" : "0"});
        std::cout << summary_line(m, mu, 1) << " N=" << grids[j] << " dispersion=" << h / h0 << '\n';
      }
    }
    table.write((common.dir() / "dispersion.csv").string());
  }
};

struct LevelSetCmd {
  Common common;
  SurfaceOptions surf;
  LevelSetConfig cfg;
  int coarse_levels = 0;
  int coarse_steps = -1;

  void add(CLI::App& app, std::function<void()>& action) {
    CLI::App* sub = app.add_subcommand("optimize-levelset", "ersatz level-set ascent on |Omega| mu_k");
    common.add_to(sub);
    surf.add_to(sub);
    sub->add_option("--k", cfg.k, "eigenvalue index");
    sub->add_option("--area", cfg.target_area, "target area of the penalty");
    sub->add_option("--epsilon", cfg.epsilon, "ersatz regularization");
    sub->add_option("--sigma", cfg.sigma_s, "indicator smoothing");
    sub->add_option("--gamma", cfg.gamma, "fixed-phase step factor");
    sub->add_option("--b", cfg.b, "area penalty weight");
    sub->add_option("--alpha", cfg.alpha, "velocity regularization");
    sub->add_option("--steps", cfg.n_steps, "fixed-phase steps");
    sub->add_option("--adaptive-steps", cfg.adaptive_steps, "adaptive-phase step cap");
    sub->add_option("--trig-p", cfg.trig_p, "first trigonometric degree");
    sub->add_option("--trig-q", cfg.trig_q, "second trigonometric degree");
    sub->add_option("--restarts", cfg.restarts, "random restarts");
    sub->add_option("--redistance-period", cfg.redistance_period, "steps between redistancing");
    sub->add_option("--cluster-rel-gap", cfg.cluster_rel_gap, "cluster threshold relative to mu_k");
    sub->add_option("--coarse-levels", coarse_levels,
                    "levels below the target mesh for a multistart warm start (0 disables it); "
                    "the restarts then run on the coarse mesh and the target mesh runs once");
    sub->add_option("--coarse-steps", coarse_steps, "fixed-phase steps on the coarse mesh");
    sub->callback([this, &action] { action = [this] { run(); }; });
  }

  void run() {
    surf.validate();
    require(cfg.k >= 1, "--k must be at least 1");
    require(cfg.epsilon > 0.0 && cfg.sigma_s > 0.0 && cfg.gamma > 0.0 && cfg.b > 0.0 && cfg.alpha > 0.0,
            "epsilon, sigma, gamma, b and alpha must be positive");
    require(cfg.n_steps >= 0 && cfg.adaptive_steps >= 0 && cfg.restarts >= 1, "bad step counts");
    require(cfg.trig_p >= 0 && cfg.trig_q >= 0 && cfg.redistance_period >= 1, "bad initialization settings");
    require(cfg.cluster_rel_gap >= 0.0, "--cluster-rel-gap must be nonnegative");
    require(coarse_levels >= 0, "--coarse-levels must be nonnegative");
    cfg.seed = common.seed;
    const SurfaceMesh mesh = surf.build();
    require(cfg.target_area > 0.0 && cfg.target_area < total_area(mesh), "--area out of range");

    const fs::path dir = common.dir();
    TraceSink sink;
    PartialGuard guard{dir / "trace.csv", &sink, cfg.k};

    const bool warm = coarse_levels > 0 && (surf.surface != "sphere" || surf.subdiv >= coarse_levels);
    if (warm) {
      const SurfaceMesh coarse = surf.build(-coarse_levels);
      LevelSetConfig c = cfg;
      if (coarse_steps >= 0) c.n_steps = coarse_steps;
      const LevelSetResult first = optimize_levelset(coarse, c);
      std::cout << "coarse " << summary_line(first.area, first.mu, cfg.k) << " J=" << first.J << '\n';
      cfg.initial_phi = transfer_vertex_field(coarse, first.field.values(), mesh);
      cfg.restarts = 1;
    }
    cfg.observer = sink.observer();
    const LevelSetResult res = optimize_levelset(mesh, cfg);
    if (res.trace.failed) {
      std::cerr << "optimization stopped early: " << res.trace.failure << '\n';
      trace_table(res.trace, cfg.k).write((dir / "trace.csv.partial").string());
      guard.done = true;
      throw NumericalError(res.trace.failure);
    }
    guard.done = true;

    write_medit_mesh(mesh, (dir / "levelset.mesh").string());
    write_medit_sol(res.field.values(), mesh.num_vertices(), (dir / "levelset.sol").string());
    write_medit_sol(smoothed_indicator(mesh, res.field).values(), mesh.num_vertices(),
                    (dir / "indicator.sol").string());
    trace_table(res.trace, cfg.k).write((dir / "trace.csv").string());
    std::cout << summary_line(res.area, res.mu, cfg.k) << " J=" << res.J << '\n';
  }
};

// ------------------------------------------------------------ config handling

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

// Inserts `--key value` tokens from the config file right after the
// subcommand name, skipping keys that the command line sets itself.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::size_t sub_at = args.size();
  CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i].rfind("-", 0) == 0) continue;
    sub = app.get_subcommand_no_throw(args[i]);
    if (sub != nullptr) {
      sub_at = i;
      break;
    }
  }
  if (sub == nullptr) return args;
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = sub_at + 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string key = a.substr(2, a.find('=') - 2);
    given.insert(key);
    if (key == "config") {
      if (a.find('=') != std::string::npos) path = a.substr(a.find('=') + 1);
      else if (i + 1 < args.size()) path = args[i + 1];
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_config(path)) {
    if (given.count(key) || key == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("unknown config key '" + key + "'");
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") extra.push_back("--" + key);
      else if (!(value == "false" || value == "0" || value == "no")) {
        throw UsageError("config key '" + key + "' expects true or false");
      }
    } else {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neumann eigenvalue optimization on triangulated surfaces"};
  app.require_subcommand(1);
  std::function<void()> action;
  MeshCmd mesh_cmd;
  ReferenceCmd reference_cmd;
  DensityCmd density_cmd;
  Density1DCmd density1d_cmd;
  DispersionCmd dispersion_cmd;
  LevelSetCmd levelset_cmd;
  mesh_cmd.add(app, action);
  reference_cmd.add(app, action);
  density_cmd.add(app, action);
  density1d_cmd.add(app, action);
  dispersion_cmd.add(app, action);
  levelset_cmd.add(app, action);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(app, std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const neumann::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

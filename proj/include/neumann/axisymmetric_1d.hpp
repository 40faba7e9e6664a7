#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "neumann/density_optimizer.hpp"

namespace neumann {

/// Density as a function of colatitude, P1 on the uniform grid
/// theta_i = i pi / N, i = 0..N.
class LatitudeDensity {
 public:
  explicit LatitudeDensity(std::vector<double> values);
  static LatitudeDensity constant(int n_elements, double value);

  int elements() const { return static_cast<int>(values_.size()) - 1; }
  std::span<const double> values() const { return values_; }
  double operator[](int i) const { return values_[i]; }
  double theta(int i) const;

 private:
  std::vector<double> values_;
};

/// g_l = 2 pi int psi_l sin(theta): the mass of a latitude density is rho . g.
Eigen::VectorXd latitude_mass_vector(int n_elements);

/// Spectra of the two regularized axisymmetric problems:
///   mode1: -((rho sin + eps) y')' + (rho + eps)/sin y = mu (rho sin + eps^2) y,
///          y(0) = y(pi) = 0
///   mode0: -((rho sin + eps) y')' = mu (rho sin + eps^2) y, natural ends
/// `mode0` starts with its zero eigenvalue.
struct AxisymSpectrum {
  std::vector<double> mode1;
  std::vector<double> mode0;
  Eigen::MatrixXd mode1_vectors;  // full length N+1, zero at both poles
  Eigen::MatrixXd mode0_vectors;
};

AxisymSpectrum axisym_spectrum(const LatitudeDensity& rho, double epsilon, int count);

/// min(least mode-1 eigenvalue, least nonzero mode-0 eigenvalue).
double axisym_mu1(const LatitudeDensity& rho, double epsilon);

/// First nonzero Neumann eigenvalue of the geodesic cap of area m, as the
/// minimum of the azimuthal modes 1 and 0 (P1 on n_elements cells).
double cap_reference_mu1(double m, int n_elements = 10000);
double cap_mode1_mu(double m, int n_elements = 10000);
double cap_mode0_mu(double m, int n_elements = 10000);

/// Reference value for mu_k: k disjoint caps of area m/k each.
double union_of_k_balls_mu(double m, int k, int n_elements = 10000);

/// Evaluator for the ascent engine: the spectrum list is 0 followed by the
/// merged, sorted mode-1 and nonzero mode-0 eigenvalues.
SpectralEvaluator latitude_evaluator(int n_elements, double epsilon, int count);

struct Density1DResult {
  LatitudeDensity density;
  OptTrace trace;
};

/// Projected ascent on the latitude grid; `config.target_mass` is replaced
/// by m.
Density1DResult optimize_density_1d(double m, int n_elements, DensityOptConfig config);

/// h = N/pi int rho (1 - rho), trapezoid rule on the grid.
double dispersion(const LatitudeDensity& rho);

/// h_m(N) / h_m(N_0) for each N in `grid_sizes` (first entry is N_0), each
/// from its own 1D optimization.
std::vector<double> dispersion_ratio(double m, const std::vector<int>& grid_sizes,
                                     const DensityOptConfig& config);

}  // namespace neumann

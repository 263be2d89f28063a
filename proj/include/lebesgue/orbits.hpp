#ifndef LEBESGUE_ORBITS_HPP
#define LEBESGUE_ORBITS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lebesgue/rng.hpp"
#include "lebesgue/step_function.hpp"

namespace lebesgue {

// Sphere projections.

/// Uniform point on the sphere of radius r in R^n (normalized Gaussian vector).
Eigen::VectorXd sphere_uniform(RngStream& rng, int n, double r);

/// Density of one coordinate of the uniform law on S^{n-1}_r:
/// c (r^2 - x^2)^((n-3)/2) on [-r, r], zero outside.
double mp_projection_density(double x, int n, double r);

/// CDF of the projection law by quadrature of mp_projection_density.
double mp_projection_cdf(double x, int n, double r);

/// The same CDF at every point of a sorted vector, integrating segment by segment.
std::vector<double> mp_projection_cdf_sorted(const std::vector<double>& sorted_x, int n, double r);

/// sup_x |CDF_n(x) - Phi(x)| for the projection law at r = sqrt(n), by quadrature.
double mp_normal_distance(int n);

struct MaxwellPoincareReport {
  int n = 0;
  double c = 1.0;
  std::size_t samples = 0;
  double ks_normal = 0.0;        // first coordinate vs Normal(0, c^2)
  double ks_exact = 0.0;         // first coordinate vs the projection law
  double critical_5pct = 0.0;
  double quadrature_distance = 0.0;
};

MaxwellPoincareReport maxwell_poincare_experiment(const RngStream& rng, int n, double c, std::size_t samples,
                                                  unsigned threads = 1);

// Cartan orbits. Coordinates x_1..x_n on H_n = {sum x = 0} carry the
// Lebesgue measure dx_1 ... dx_{n-1}.

struct OrbitSample {
  Eigen::VectorXd log_coords;
  double proposal_log_density = 0.0;
  int n = 0;
  double theta = 1.0;

  /// y_k = exp(x_k - theta n), so prod y_k = exp(-theta n^2).
  Eigen::VectorXd orbit_point() const;
};

double default_proposal_sigma(int n);

/// Log density, relative to dx_1..dx_{n-1}, of the centered Gaussian on H_n
/// obtained by projecting N(0, sigma^2 I_n): (2 pi sigma^2)^{-(n-1)/2} sqrt(n) exp(-|x|^2 / 2 sigma^2).
double hyperplane_gaussian_log_density(const Eigen::VectorXd& x, double sigma);

OrbitSample cartan_orbit_sample(RngStream& rng, int n, double theta, double proposal_sigma);

/// Points t_1..t_n in [0, 1].
struct UniformlySpreadLocations {
  Eigen::VectorXd points;

  /// Star discrepancy of the point set.
  double star_discrepancy() const;
};

/// Radical-inverse (van der Corput) points for indices 1..n.
UniformlySpreadLocations van_der_corput(int n, int base = 2);

/// (prod_k f(t_k))^(1/n), evaluated in log space.
double rho_geometric_mean(const StepFunctiond& f, const UniformlySpreadLocations& locs);

struct OrbitEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double effective_sample_size = 0.0;
  bool unreliable = false;  // ESS below N/100
  std::size_t samples = 0;
};

/// Importance estimate of D_{n,theta}(f) = int_{H_n} exp(-sum_k f(t_k) e^{x_k - theta n}) dx.
OrbitEstimate laplace_orbit_Dn(const RngStream& rng, const StepFunctiond& f, const UniformlySpreadLocations& locs,
                               double theta, std::size_t samples, double proposal_sigma, unsigned threads = 1);
/// Same, with van der Corput locations.
OrbitEstimate laplace_orbit_Dn(const RngStream& rng, const StepFunctiond& f, int n, double theta,
                               std::size_t samples, double proposal_sigma, unsigned threads = 1);

// Mellin-Barnes function F_n(lambda) = int_{H_n} exp(-lambda sum_k e^{x_k}) dx.

struct MellinBarnesValue {
  double value = 0.0;
  double error = 0.0;  // quadrature: step-halving difference; MC: standard error
  bool converged = false;
  std::string method;
};

inline constexpr int kMellinBarnesMaxQuadratureN = 6;

/// Product trapezoid rule on the lattice h Z^{n-1} of H_n, evaluated as a
/// discrete n-fold convolution and refined by step halving until two
/// successive values agree within tol (relative). n <= 6.
MellinBarnesValue mellin_barnes_Fn(double lambda, int n, double tol = 1e-12);

/// Importance-sampling estimate with the hyperplane Gaussian proposal.
MellinBarnesValue mellin_barnes_Fn_mc(const RngStream& rng, double lambda, int n, std::size_t samples,
                                      double proposal_sigma, unsigned threads = 1);

struct OdeResidual {
  double operator_value = 0.0;      // (1 + lambda d/dlambda)^{n-1} dF/dlambda by finite differences
  double value = 0.0;               // F_n(lambda)
  double residual_plus = 0.0;       // |operator - F|
  double residual_minus = 0.0;      // |operator + F|
  double residual_log_euler = 0.0;  // |(lambda d/dlambda)^n F - (-n lambda)^n F|
  bool minus_is_smaller = false;
};

/// Central differences of order 2 with step h in u = ln lambda.
OdeResidual mellin_barnes_ode_residual(int n, double lambda, double h);

struct OdeConvergence {
  std::vector<double> steps;
  std::vector<OdeResidual> residuals;
  double order_plus = 0.0;
  double order_minus = 0.0;
  double order_best = 0.0;   // order of min(plus, minus)
  double order_log_euler = 0.0;
};

/// Residuals over a sequence of halving steps with fitted log-log slopes (last two steps).
OdeConvergence mellin_barnes_ode_convergence(int n, double lambda, const std::vector<double>& steps);

struct ZagierRow {
  int n = 0;
  double value = 0.0;      // F_n(lambda)^{1/n}
  double stderr_ = 0.0;    // zero for quadrature rows
  double difference = 0.0; // value_n - value_{n-1}
  double difference_stderr = 0.0;
  std::string method;
};

/// F_n(lambda)^{1/n} for n = 1..n_max: quadrature for n <= 6, Monte Carlo
/// (mean over `repeats` independent seeds) above, n_max <= 20.
std::vector<ZagierRow> zagier_limit_probe(const RngStream& rng, double lambda, int n_max, std::size_t samples,
                                          int repeats = 4, unsigned threads = 1);

struct WindowVolumeRow {
  double s = 0.0;
  double volume = 0.0;
  double stderr_ = 0.0;
  double effective_sample_size = 0.0;
  bool unreliable = false;
};

/// Leb_{n-1}{x in H_n : sum e^{x_k} <= s e^{theta n}} by importance sampling
/// (common samples across the grid, so estimates are nondecreasing in s).
std::vector<WindowVolumeRow> lebesgue_window_volume(const RngStream& rng, int n, double theta,
                                                    const std::vector<double>& s_grid, std::size_t samples,
                                                    double proposal_sigma, unsigned threads = 1);

}  // namespace lebesgue

#endif  // LEBESGUE_ORBITS_HPP

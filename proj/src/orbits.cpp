#include "lebesgue/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "lebesgue/errors.hpp"
#include "lebesgue/parallel.hpp"
#include "lebesgue/quadrature.hpp"
#include "lebesgue/special.hpp"
#include "lebesgue/stats.hpp"

namespace lebesgue {

namespace {

double mp_log_constant(int n, double r) {
  return std::lgamma(0.5 * n) - 0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * (n - 1)) -
         (n - 2) * std::log(r);
}

// Density in terms of the distances to the two ends of [-r, r].
double mp_density_from_distances(double to_left, double to_right, int n, double log_c) {
  if (n == 3) return std::exp(log_c);
  if (to_left <= 0.0 || to_right <= 0.0) return 0.0;
  return std::exp(log_c + 0.5 * (n - 3) * (std::log(to_left) + std::log(to_right)));
}

void check_sphere_args(int n, double r) {
  if (n < 3) throw ParameterError("projection law requires n >= 3");
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
}

}  // namespace

Eigen::VectorXd sphere_uniform(RngStream& rng, int n, double r) {
  if (n < 2) throw ParameterError("sphere_uniform: n must be at least 2");
  if (!(r > 0.0)) throw ParameterError("sphere_uniform: radius must be positive");
  return r * unit_direction(rng, n);
}

double mp_projection_density(double x, int n, double r) {
  check_sphere_args(n, r);
  if (std::abs(x) > r) return 0.0;
  return mp_density_from_distances(x + r, r - x, n, mp_log_constant(n, r));
}

double mp_projection_cdf(double x, int n, double r) {
  check_sphere_args(n, r);
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  if (x < 0.0) return 1.0 - mp_projection_cdf(-x, n, r);
  const double log_c = mp_log_constant(n, r);
  const auto q = quad::integrate_tanh_sinh(
      [&](double t, double, double to_right) {
        return mp_density_from_distances(t + r, (r - x) + to_right, n, log_c);
      },
      0.0, x, 1e-14);
  return 0.5 + q.value;
}

std::vector<double> mp_projection_cdf_sorted(const std::vector<double>& sorted_x, int n, double r) {
  check_sphere_args(n, r);
  const double log_c = mp_log_constant(n, r);
  auto density = [&](double t) { return mp_density_from_distances(t + r, r - t, n, log_c); };
  std::vector<double> out(sorted_x.size());
  double previous = -r;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < sorted_x.size(); ++i) {
    const double x = std::clamp(sorted_x[i], -r, r);
    if (x > previous) {
      cumulative += quad::integrate(density, previous, x, 1e-15, 1e-13).value;
      previous = x;
    }
    out[i] = std::min(cumulative, 1.0);
  }
  return out;
}

double mp_normal_distance(int n) {
  const double r = std::sqrt(static_cast<double>(n));
  check_sphere_args(n, r);
  const double log_c = mp_log_constant(n, r);
  auto density = [&](double t) { return mp_density_from_distances(t + r, r - t, n, log_c); };
  const double upper = std::min(r, 10.0);
  constexpr int kGrid = 4000;
  const double dx = upper / kGrid;
  double cdf = 0.5;
  double distance = 0.0;
  for (int j = 1; j <= kGrid; ++j) {
    const double a = (j - 1) * dx;
    const double b = (j == kGrid) ? upper : j * dx;
    cdf += quad::integrate(density, a, b, 1e-16, 1e-13).value;
    distance = std::max(distance, std::abs(cdf - normal_cdf(b)));
  }
  if (r <= 10.0) distance = std::max(distance, std::abs(1.0 - normal_cdf(r)));
  return distance;
}

MaxwellPoincareReport maxwell_poincare_experiment(const RngStream& rng, int n, double c, std::size_t samples,
                                                  unsigned threads) {
  if (!(c > 0.0)) throw ParameterError("maxwell_poincare_experiment: c must be positive");
  if (samples == 0) throw ParameterError("maxwell_poincare_experiment: no samples");
  const double r = c * std::sqrt(static_cast<double>(n));
  check_sphere_args(n, r);
  std::vector<double> first(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream local = rng.split(i);
    first[i] = sphere_uniform(local, n, r)[0];
  });
  std::sort(first.begin(), first.end());

  MaxwellPoincareReport rep;
  rep.n = n;
  rep.c = c;
  rep.samples = samples;
  rep.ks_normal = stats::ks_statistic(first, [c](double x) { return normal_cdf(x, c); });
  const std::vector<double> exact = mp_projection_cdf_sorted(first, n, r);
  rep.ks_exact = stats::ks_statistic_tabulated(first, exact);
  rep.critical_5pct = stats::ks_critical_one_sample(samples, stats::kDiagnosticAlpha);
  rep.quadrature_distance = mp_normal_distance(n);
  return rep;
}

Eigen::VectorXd OrbitSample::orbit_point() const {
  return (log_coords.array() - theta * n).exp().matrix();
}

double default_proposal_sigma(int n) { return std::sqrt(std::log(static_cast<double>(n)) + 1.0); }

double hyperplane_gaussian_log_density(const Eigen::VectorXd& x, double sigma) {
  const double n = static_cast<double>(x.size());
  return -0.5 * (n - 1.0) * std::log(2.0 * std::numbers::pi * sigma * sigma) + 0.5 * std::log(n) -
         x.squaredNorm() / (2.0 * sigma * sigma);
}

OrbitSample cartan_orbit_sample(RngStream& rng, int n, double theta, double proposal_sigma) {
  if (n < 1) throw ParameterError("cartan_orbit_sample: n must be at least 1");
  if (!(proposal_sigma > 0.0)) throw ParameterError("cartan_orbit_sample: proposal_sigma must be positive");
  OrbitSample s;
  s.n = n;
  s.theta = theta;
  s.log_coords.resize(n);
  if (n == 1) {
    s.log_coords[0] = 0.0;
    s.proposal_log_density = 0.0;
    return s;
  }
  for (int k = 0; k < n; ++k) s.log_coords[k] = proposal_sigma * standard_normal(rng);
  s.log_coords.array() -= s.log_coords.mean();
  s.proposal_log_density = hyperplane_gaussian_log_density(s.log_coords, proposal_sigma);
  return s;
}

double UniformlySpreadLocations::star_discrepancy() const {
  std::vector<double> t(points.data(), points.data() + points.size());
  std::sort(t.begin(), t.end());
  const double n = static_cast<double>(t.size());
  double d = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    d = std::max({d, (i + 1) / n - t[i], t[i] - i / n});
  }
  return d;
}

UniformlySpreadLocations van_der_corput(int n, int base) {
  if (n < 1 || base < 2) throw ParameterError("van_der_corput: need n >= 1 and base >= 2");
  UniformlySpreadLocations locs;
  locs.points.resize(n);
  for (int i = 1; i <= n; ++i) {
    double value = 0.0;
    double scale = 1.0 / base;
    for (int k = i; k > 0; k /= base) {
      value += (k % base) * scale;
      scale /= base;
    }
    locs.points[i - 1] = value;
  }
  return locs;
}

double rho_geometric_mean(const StepFunctiond& f, const UniformlySpreadLocations& locs) {
  if (!f.positive()) throw DomainError("rho_geometric_mean: f must be positive");
  double log_sum = 0.0;
  for (Eigen::Index k = 0; k < locs.points.size(); ++k) log_sum += std::log(f(locs.points[k]));
  return std::exp(log_sum / static_cast<double>(locs.points.size()));
}

namespace {

// Mean of exp(log_integrand(x) - log q(x)) over hyperplane Gaussian draws.
OrbitEstimate importance_on_hyperplane(const RngStream& rng, int n, double sigma, std::size_t samples,
                                       unsigned threads,
                                       const std::function<double(const Eigen::VectorXd&)>& log_integrand) {
  if (samples == 0) throw ParameterError("importance estimate needs at least one sample");
  std::vector<double> summands(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream local = rng.split(i);
    const OrbitSample s = cartan_orbit_sample(local, n, 1.0, sigma);
    summands[i] = std::exp(log_integrand(s.log_coords) - s.proposal_log_density);
  });
  const stats::MeanEstimate m = stats::mc_mean_stderr(summands);
  OrbitEstimate out;
  out.estimate = m.mean;
  out.stderr_ = m.stderr_;
  out.samples = samples;
  out.effective_sample_size = stats::effective_sample_size(summands);
  out.unreliable = out.effective_sample_size < static_cast<double>(samples) / 100.0;
  return out;
}

}  // namespace

OrbitEstimate laplace_orbit_Dn(const RngStream& rng, const StepFunctiond& f, const UniformlySpreadLocations& locs,
                               double theta, std::size_t samples, double proposal_sigma, unsigned threads) {
  if (!f.positive()) throw DomainError("laplace_orbit_Dn: f must be positive");
  if (!(theta > 0.0)) throw ParameterError("laplace_orbit_Dn: theta must be positive");
  const int n = static_cast<int>(locs.points.size());
  if (n < 1) throw ParameterError("laplace_orbit_Dn: no locations");
  Eigen::VectorXd f_at(n);
  for (int k = 0; k < n; ++k) f_at[k] = f(locs.points[k]);
  if (n == 1) {
    OrbitEstimate out;
    out.estimate = std::exp(-f_at[0] * std::exp(-theta));
    out.samples = samples;
    out.effective_sample_size = static_cast<double>(samples);
    return out;
  }
  const double shift = theta * n;
  return importance_on_hyperplane(rng, n, proposal_sigma, samples, threads, [&](const Eigen::VectorXd& x) {
    return -(f_at.array() * (x.array() - shift).exp()).sum();
  });
}

OrbitEstimate laplace_orbit_Dn(const RngStream& rng, const StepFunctiond& f, int n, double theta,
                               std::size_t samples, double proposal_sigma, unsigned threads) {
  return laplace_orbit_Dn(rng, f, van_der_corput(n), theta, samples, proposal_sigma, threads);
}

namespace {

// Product trapezoid value of F_n(lambda) with lattice step h.
double mellin_barnes_lattice(double lambda, int n, double h) {
  if (n == 1) return std::exp(-lambda);
  // exp(-lambda e^U) < e^-45 beyond U.
  const double upper = std::max(std::log(45.0 / lambda), 0.0) + 1.0;
  const long iu = static_cast<long>(std::ceil(upper / h));
  const long il = -(n - 1) * iu;
  auto g = [&](long j) { return std::exp(-lambda * std::exp(static_cast<double>(j) * h)); };
  std::vector<double> gv(static_cast<std::size_t>(iu - il + 1));
  for (long j = il; j <= iu; ++j) gv[static_cast<std::size_t>(j - il)] = g(j);

  // a_k(s): lattice sum over the first k coordinates with partial sum s. The
  // remaining n - k coordinates, each in [il, iu], must bring the sum to 0.
  auto range_for = [&](int k) {
    const long lo = std::max(k * il, -(n - k) * iu);
    const long hi = std::min(k * iu, -(n - k) * il);
    return std::pair<long, long>(lo, hi);
  };
  auto [lo, hi] = range_for(1);
  std::vector<double> a(static_cast<std::size_t>(hi - lo + 1));
  for (long s = lo; s <= hi; ++s) a[static_cast<std::size_t>(s - lo)] = gv[static_cast<std::size_t>(s - il)];
  for (int k = 2; k <= n - 1; ++k) {
    auto [nlo, nhi] = range_for(k);
    std::vector<double> next(static_cast<std::size_t>(nhi - nlo + 1), 0.0);
    for (long s = nlo; s <= nhi; ++s) {
      double acc = 0.0;
      const long x_lo = std::max(il, s - hi);
      const long x_hi = std::min(iu, s - lo);
      for (long x = x_lo; x <= x_hi; ++x) {
        acc += gv[static_cast<std::size_t>(x - il)] * a[static_cast<std::size_t>(s - x - lo)];
      }
      next[static_cast<std::size_t>(s - nlo)] = acc;
    }
    a = std::move(next);
    lo = nlo;
    hi = nhi;
  }
  double total = 0.0;
  for (long s = lo; s <= hi; ++s) {
    const long last = -s;
    if (last < il || last > iu) continue;
    total += a[static_cast<std::size_t>(s - lo)] * gv[static_cast<std::size_t>(last - il)];
  }
  return total * std::pow(h, n - 1);
}

}  // namespace

MellinBarnesValue mellin_barnes_Fn(double lambda, int n, double tol) {
  if (!(lambda > 0.0)) throw ParameterError("mellin_barnes_Fn: lambda must be positive");
  if (n < 1 || n > kMellinBarnesMaxQuadratureN) {
    throw ParameterError("mellin_barnes_Fn: quadrature mode needs 1 <= n <= 6");
  }
  MellinBarnesValue out;
  out.method = "lattice-trapezoid";
  if (n == 1) {
    out.value = std::exp(-lambda);
    out.converged = true;
    return out;
  }
  double h = 0.25;
  double previous = mellin_barnes_lattice(lambda, n, h);
  for (int level = 0; level < 6; ++level) {
    h *= 0.5;
    const double current = mellin_barnes_lattice(lambda, n, h);
    out.value = current;
    out.error = std::abs(current - previous);
    if (out.error <= tol * std::abs(current)) {
      out.converged = true;
      break;
    }
    previous = current;
  }
  return out;
}

MellinBarnesValue mellin_barnes_Fn_mc(const RngStream& rng, double lambda, int n, std::size_t samples,
                                      double proposal_sigma, unsigned threads) {
  if (!(lambda > 0.0)) throw ParameterError("mellin_barnes_Fn_mc: lambda must be positive");
  MellinBarnesValue out;
  out.method = "monte-carlo";
  if (n == 1) {
    out.value = std::exp(-lambda);
    out.converged = true;
    return out;
  }
  const OrbitEstimate e = importance_on_hyperplane(rng, n, proposal_sigma, samples, threads,
                                                   [&](const Eigen::VectorXd& x) { return -lambda * x.array().exp().sum(); });
  out.value = e.estimate;
  out.error = e.stderr_;
  out.converged = !e.unreliable;
  return out;
}

OdeResidual mellin_barnes_ode_residual(int n, double lambda, double h) {
  if (n < 1 || n > 4) throw ParameterError("mellin_barnes_ode_residual: 1 <= n <= 4");
  if (!(h > 0.0)) throw ParameterError("mellin_barnes_ode_residual: step must be positive");
  const double u0 = std::log(lambda);
  const int k = n;  // each difference consumes one grid point per side
  std::vector<double> f(static_cast<std::size_t>(2 * k + 1));
  for (int j = -k; j <= k; ++j) {
    const double lam = std::exp(u0 + j * h);
    f[static_cast<std::size_t>(j + k)] = mellin_barnes_Fn(lam, n, 1e-15).value;
  }
  auto central = [h](const std::vector<double>& v) {
    std::vector<double> d(v.size() - 2);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) d[i - 1] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    return d;
  };

  // dF/dlambda = e^{-u} dF/du, then (1 + d/du) applied n - 1 times.
  std::vector<double> g = central(f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int j = static_cast<int>(i) - (k - 1);
    g[i] *= std::exp(-(u0 + j * h));
  }
  for (int rep = 0; rep < n - 1; ++rep) {
    const std::vector<double> d = central(g);
    std::vector<double> next(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) next[i] = g[i + 1] + d[i];
    g = std::move(next);
  }

  std::vector<double> euler = f;
  for (int rep = 0; rep < n; ++rep) euler = central(euler);

  OdeResidual r;
  r.value = f[static_cast<std::size_t>(k)];
  r.operator_value = g.front();
  r.residual_plus = std::abs(r.operator_value - r.value);
  r.residual_minus = std::abs(r.operator_value + r.value);
  r.residual_log_euler = std::abs(euler.front() - std::pow(-n * lambda, n) * r.value);
  r.minus_is_smaller = r.residual_minus < r.residual_plus;
  return r;
}

OdeConvergence mellin_barnes_ode_convergence(int n, double lambda, const std::vector<double>& steps) {
  if (steps.size() < 2) throw ParameterError("mellin_barnes_ode_convergence: need at least two steps");
  OdeConvergence c;
  c.steps = steps;
  for (double h : steps) c.residuals.push_back(mellin_barnes_ode_residual(n, lambda, h));
  const std::size_t a = steps.size() - 2;
  const std::size_t b = steps.size() - 1;
  const double ratio = std::log(steps[a] / steps[b]);
  auto order = [&](double ra, double rb) { return std::log(ra / rb) / ratio; };
  c.order_plus = order(c.residuals[a].residual_plus, c.residuals[b].residual_plus);
  c.order_minus = order(c.residuals[a].residual_minus, c.residuals[b].residual_minus);
  auto best = [](const OdeResidual& r) { return std::min(r.residual_plus, r.residual_minus); };
  c.order_best = order(best(c.residuals[a]), best(c.residuals[b]));
  c.order_log_euler = order(c.residuals[a].residual_log_euler, c.residuals[b].residual_log_euler);
  return c;
}

std::vector<ZagierRow> zagier_limit_probe(const RngStream& rng, double lambda, int n_max, std::size_t samples,
                                          int repeats, unsigned threads) {
  if (n_max < 1 || n_max > 20) throw ParameterError("zagier_limit_probe: 1 <= n_max <= 20");
  if (repeats < 2) throw ParameterError("zagier_limit_probe: need at least two repeats");
  std::vector<ZagierRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    ZagierRow row;
    row.n = n;
    if (n <= kMellinBarnesMaxQuadratureN) {
      row.value = std::pow(mellin_barnes_Fn(lambda, n).value, 1.0 / n);
      row.method = "lattice-trapezoid";
    } else {
      std::vector<double> values;
      for (int rep = 0; rep < repeats; ++rep) {
        const RngStream stream = rng.split(static_cast<std::uint64_t>(n) * 1000 + rep);
        const double fn = mellin_barnes_Fn_mc(stream, lambda, n, samples, default_proposal_sigma(n), threads).value;
        values.push_back(std::pow(fn, 1.0 / n));
      }
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= repeats;
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      row.value = mean;
      row.stderr_ = std::sqrt(ss / (repeats - 1) / repeats);
      row.method = "monte-carlo";
    }
    if (!rows.empty()) {
      row.difference = row.value - rows.back().value;
      row.difference_stderr = std::hypot(row.stderr_, rows.back().stderr_);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<WindowVolumeRow> lebesgue_window_volume(const RngStream& rng, int n, double theta,
                                                    const std::vector<double>& s_grid, std::size_t samples,
                                                    double proposal_sigma, unsigned threads) {
  if (n < 2) throw ParameterError("lebesgue_window_volume: n must be at least 2");
  if (samples == 0) throw ParameterError("lebesgue_window_volume: no samples");
  for (double s : s_grid) {
    if (!(s > 0.0)) throw ParameterError("lebesgue_window_volume: grid must be positive");
  }
  std::vector<double> exp_sums(samples);
  std::vector<double> inverse_q(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream local = rng.split(i);
    const OrbitSample s = cartan_orbit_sample(local, n, theta, proposal_sigma);
    exp_sums[i] = s.log_coords.array().exp().sum();
    inverse_q[i] = std::exp(-s.proposal_log_density);
  });
  std::vector<WindowVolumeRow> rows;
  std::vector<double> summands(samples);
  for (double s : s_grid) {
    const double bound = s * std::exp(theta * n);
    for (std::size_t i = 0; i < samples; ++i) summands[i] = exp_sums[i] <= bound ? inverse_q[i] : 0.0;
    const stats::MeanEstimate m = stats::mc_mean_stderr(summands);
    WindowVolumeRow row;
    row.s = s;
    row.volume = m.mean;
    row.stderr_ = m.stderr_;
    row.effective_sample_size = stats::effective_sample_size(summands);
    row.unreliable = row.volume > 0.0 && row.effective_sample_size < static_cast<double>(samples) / 100.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lebesgue

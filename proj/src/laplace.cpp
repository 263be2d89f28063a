#include "lebesgue/laplace.hpp"

#include <cmath>
#include <limits>

#include "lebesgue/quadrature.hpp"
#include "lebesgue/special.hpp"
#include "lebesgue/stats.hpp"

namespace lebesgue {

QuadratureValue finite_dim_laplace_quadrature(const StepFunctiond& f, double theta, double tail) {
  if (!f.positive()) throw DomainError("finite_dim_laplace_quadrature: test function must be positive");
  QuadratureValue out;
  out.value = 1.0;
  out.converged = true;
  double relative_error = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    const double a = theta * f.partition().mass(k);
    const double rate = f.values()[k];
    const double upper = gamma_tail_cutoff(a, rate, tail);
    quad::QuadResult r;
    double scale;
    if (a < 1.0) {
      // v = x^a removes the x^(a-1) singularity at the origin.
      const double inv_a = 1.0 / a;
      r = quad::integrate([&](double v) { return std::exp(-rate * std::pow(v, inv_a)); }, 0.0, std::pow(upper, a),
                          0.0, 1e-14);
      scale = std::exp(-std::lgamma(a + 1.0));
    } else {
      r = quad::integrate([&](double x) { return std::pow(x, a - 1.0) * std::exp(-rate * x); }, 0.0, upper, 0.0,
                          1e-14);
      scale = std::exp(-std::lgamma(a));
    }
    out.value *= scale * r.value;
    relative_error += r.error / std::abs(r.value);
    out.converged = out.converged && r.converged;
  }
  out.error_estimate = relative_error * out.value;
  return out;
}

std::vector<MergeRow> refinement_merge_check(const MeshPartitiond& partition, double theta, Eigen::Index i,
                                             Eigen::Index j, const std::vector<double>& s_grid) {
  if (i < 0 || j < 0 || i >= partition.size() || j >= partition.size() || i == j) {
    throw ParameterError("refinement_merge_check: invalid cell indices");
  }
  const double a = theta * partition.mass(i);
  const double b = theta * partition.mass(j);
  const double log_norm = std::lgamma(a) + std::lgamma(b);
  std::vector<MergeRow> rows;
  for (double s : s_grid) {
    if (!(s > 0.0)) throw ParameterError("refinement_merge_check: grid points must be positive");
    // Split at s/2 and substitute x = v^(1/a) (resp. y = w^(1/b)) to absorb
    // the endpoint singularities; both halves are then smooth.
    const double half = 0.5 * s;
    const auto left = quad::integrate(
        [&](double v) { return std::exp((b - 1.0) * std::log(s - std::pow(v, 1.0 / a)) - log_norm); }, 0.0,
        std::pow(half, a), 1e-15, 1e-14);
    const auto right = quad::integrate(
        [&](double w) { return std::exp((a - 1.0) * std::log(s - std::pow(w, 1.0 / b)) - log_norm); }, 0.0,
        std::pow(half, b), 1e-15, 1e-14);
    const quad::QuadResult r{left.value / a + right.value / b, left.error / a + right.error / b,
                             left.evaluations + right.evaluations, left.converged && right.converged};
    MergeRow row;
    row.s = s;
    row.quadrature = r.value;
    row.closed_form = std::exp((a + b - 1.0) * std::log(s) - std::lgamma(a + b));
    row.abs_error = std::abs(row.quadrature - row.closed_form);
    rows.push_back(row);
  }
  return rows;
}

LaplaceEstimate empirical_functional(const WeightedEnsemble& ens,
                                     const std::function<double(const DiscreteMeasure&)>& log_integrand) {
  if (ens.size() == 0) throw ParameterError("empirical_functional: empty ensemble");
  std::vector<double> summands(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) summands[i] = std::exp(ens.log_weights[i] + log_integrand(ens.samples[i]));
  const stats::MeanEstimate m = stats::mc_mean_stderr(summands);
  LaplaceEstimate out;
  out.estimate = m.mean;
  out.stderr_ = m.stderr_;
  out.samples = ens.size();
  return out;
}

namespace {

void apply_variance_guard(LaplaceEstimate& est, const StepFunctiond& f) {
  if ((f.values().array().abs() <= 0.5).any()) {
    est.variance_warning = true;
    est.stderr_ = std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

LaplaceEstimate empirical_laplace(const WeightedEnsemble& ens, const StepFunctiond& f) {
  if (!f.positive()) throw DomainError("empirical_laplace: test function must be positive");
  LaplaceEstimate est = empirical_functional(ens, [&](const DiscreteMeasure& m) { return -m.pair(f); });
  apply_variance_guard(est, f);
  return est;
}

LaplaceEstimate empirical_laplace_pushed(const WeightedEnsemble& ens, const StepFunctiond& f,
                                         const std::function<DiscreteMeasure(const DiscreteMeasure&)>& push) {
  if (!f.positive()) throw DomainError("empirical_laplace_pushed: test function must be positive");
  LaplaceEstimate est = empirical_functional(ens, [&](const DiscreteMeasure& m) { return -push(m).pair(f); });
  apply_variance_guard(est, f);
  return est;
}

LaplaceEstimate empirical_laplace_signed(const WeightedEnsemble& signed_ens, const StepFunctiond& f) {
  if (!f.nonvanishing()) throw DomainError("empirical_laplace_signed: test function vanishes on a cell");
  // Gamma-law density for charges: exp(sum_k |c_k|).
  std::vector<double> summands(signed_ens.size());
  for (std::size_t i = 0; i < signed_ens.size(); ++i) {
    const DiscreteMeasure& m = signed_ens.samples[i];
    double mass = 0.0;
    for (Eigen::Index k = 0; k < m.coeffs.size(); ++k) mass += std::abs(m.coeffs[k]);
    summands[i] = std::exp(mass - m.pair_modulus(f));
  }
  const stats::MeanEstimate mean = stats::mc_mean_stderr(summands);
  LaplaceEstimate est;
  est.estimate = mean.mean;
  est.stderr_ = mean.stderr_;
  est.samples = signed_ens.size();
  apply_variance_guard(est, f);
  return est;
}

}  // namespace lebesgue

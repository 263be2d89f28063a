#include "lebesgue/measures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lebesgue/errors.hpp"
#include "lebesgue/parallel.hpp"

namespace lebesgue {

void SeriesPoint::validate() const {
  for (Eigen::Index k = 0; k < terms.size(); ++k) {
    if (!(terms[k] > 0.0)) throw PreconditionError("SeriesPoint: terms must be positive");
    if (k + 1 < terms.size() && terms[k] < terms[k + 1]) {
      throw PreconditionError("SeriesPoint: terms must be descending");
    }
  }
  if (!(truncation_tail >= 0.0)) throw PreconditionError("SeriesPoint: negative truncation tail");
  if (std::abs(terms.sum() + truncation_tail - total) > 1e-9 * total) {
    throw PreconditionError("SeriesPoint: total does not match terms plus tail");
  }
}

double DiscreteMeasure::total_mass() const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) s += coeffs[k];
  return s;
}

double DiscreteMeasure::pair(const StepFunctiond& f) const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) s += f(locations[k]) * coeffs[k];
  return s;
}

double DiscreteMeasure::pair_modulus(const StepFunctiond& f) const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) s += std::abs(f(locations[k])) * std::abs(coeffs[k]);
  return s;
}

void DiscreteMeasure::validate() const {
  if (coeffs.size() != locations.size()) throw PreconditionError("DiscreteMeasure: size mismatch");
  if ((locations.array() < 0.0).any() || (locations.array() > 1.0).any()) {
    throw PreconditionError("DiscreteMeasure: locations must lie in [0, 1]");
  }
  if (!signed_ && (coeffs.array() <= 0.0).any()) {
    throw PreconditionError("DiscreteMeasure: unsigned measure with non-positive coefficient");
  }
  std::vector<double> sorted(locations.data(), locations.data() + locations.size());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw PreconditionError("DiscreteMeasure: duplicate locations");
  }
}

std::size_t WeightedEnsemble::accepted_count() const {
  return static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 0));
}

namespace {

void check_series_args(double theta, double tail_eps) {
  if (!(theta > 0.0)) throw ParameterError("theta must be positive");
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw ParameterError("tail_eps must lie in (0, 1)");
}

}  // namespace

StickBreaking gem_stick_breaking(RngStream& rng, double theta, std::size_t max_terms, double tail_eps) {
  check_series_args(theta, tail_eps);
  StickBreaking out;
  std::vector<double> sticks;
  double remaining = 1.0;
  while (sticks.size() < max_terms && remaining >= tail_eps) {
    // xi ~ Beta(1, theta) by inversion: 1 - xi = U^(1/theta).
    const double keep = std::pow(rng.uniform(), 1.0 / theta);
    sticks.push_back(remaining * (1.0 - keep));
    remaining *= keep;
  }
  out.sticks = Eigen::Map<Eigen::VectorXd>(sticks.data(), static_cast<Eigen::Index>(sticks.size()));
  out.remaining = remaining;
  out.truncated = remaining >= tail_eps;
  return out;
}

SeriesPoint pd_sample(RngStream& rng, double theta, std::size_t max_terms, double tail_eps) {
  StickBreaking gem = gem_stick_breaking(rng, theta, max_terms, tail_eps);
  SeriesPoint out;
  out.terms = std::move(gem.sticks);
  std::stable_sort(out.terms.begin(), out.terms.end(), std::greater<>());
  // Zero-length sticks can only appear through underflow; drop them.
  Eigen::Index n = out.terms.size();
  while (n > 0 && !(out.terms[n - 1] > 0.0)) --n;
  out.terms.conservativeResize(n);
  out.total = 1.0;
  out.truncation_tail = gem.remaining;
  out.truncated = gem.truncated;
  return out;
}

SeriesPoint gamma_subordinator_jumps(RngStream& rng, double theta, std::size_t max_terms, double tail_eps) {
  check_series_args(theta, tail_eps);
  std::vector<double> jumps;
  double arrival = 0.0;
  double sum = 0.0;
  double tail = 0.0;
  bool done = false;
  while (jumps.size() < max_terms) {
    arrival += exponential_variate(rng);
    const double jump = inverse_levy_tail(theta, arrival);
    jumps.push_back(jump);
    sum += jump;
    // theta * E1(J_k) = Gamma_k, so the bound theta E1(J) J is Gamma_k J_k.
    tail = arrival * jump;
    if (tail < tail_eps * sum) {
      done = true;
      break;
    }
  }
  SeriesPoint out;
  out.terms = Eigen::Map<Eigen::VectorXd>(jumps.data(), static_cast<Eigen::Index>(jumps.size()));
  out.truncation_tail = tail;
  out.total = sum + tail;
  out.truncated = !done;
  return out;
}

SeriesPoint normalized_jumps(RngStream& rng, double theta, std::size_t max_terms, double tail_eps) {
  SeriesPoint s = gamma_subordinator_jumps(rng, theta, max_terms, tail_eps);
  const double total = s.total;
  s.terms /= total;
  s.truncation_tail /= total;
  s.total = 1.0;
  return s;
}

DiscreteMeasure attach_locations(RngStream& rng, const SeriesPoint& series) {
  DiscreteMeasure m;
  m.coeffs = series.terms;
  m.locations.resize(series.terms.size());
  for (Eigen::Index k = 0; k < m.locations.size(); ++k) m.locations[k] = rng.uniform();
  m.tail_bound = series.truncation_tail;
  return m;
}

WeightedEnsemble build_weighted_ensemble(const RngStream& rng, double theta, std::size_t n_samples, double window,
                                         const EnsembleOptions& options) {
  if (!(window > 0.0)) throw ParameterError("build_weighted_ensemble: window must be positive");
  WeightedEnsemble ens;
  ens.window = window;
  ens.theta = theta;
  ens.seed = rng.seed();
  ens.samples.resize(n_samples);
  ens.log_weights.resize(n_samples);
  ens.rejected.resize(n_samples);
  std::vector<char> truncated(n_samples, 0);
  parallel_for(n_samples, options.threads, [&](std::size_t i) {
    RngStream local = rng.split(i);
    const SeriesPoint jumps = gamma_subordinator_jumps(local, theta, options.max_terms, options.tail_eps);
    ens.samples[i] = attach_locations(local, jumps);
    ens.log_weights[i] = ens.samples[i].total_mass();
    ens.rejected[i] = ens.log_weights[i] > window ? 1 : 0;
    truncated[i] = jumps.truncated ? 1 : 0;
  });
  ens.truncation_warnings = static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 1));
  return ens;
}

DiscreteMeasure sign_symmetrize(RngStream& rng, const DiscreteMeasure& m) {
  if (m.signed_) throw PreconditionError("sign_symmetrize: measure is already signed");
  DiscreteMeasure out = m;
  for (Eigen::Index k = 0; k < out.coeffs.size(); ++k) out.coeffs[k] *= random_sign(rng);
  out.signed_ = true;
  return out;
}

DiscreteMeasure multiplier_action(const DiscreteMeasure& m, const StepFunctiond& a) {
  if (!a.nonvanishing()) throw DomainError("multiplier_action: multiplier vanishes on a cell");
  DiscreteMeasure out = m;
  for (Eigen::Index k = 0; k < out.coeffs.size(); ++k) out.coeffs[k] *= a(m.locations[k]);
  out.signed_ = m.signed_ || !a.positive();
  return out;
}

DiscreteMeasure log_map(const DiscreteMeasure& m) {
  if ((m.coeffs.array() <= 0.0).any()) throw DomainError("log_map: coefficients must be positive");
  DiscreteMeasure out = m;
  out.coeffs = -m.coeffs.array().log();
  out.signed_ = true;
  return out;
}

DiscreteMeasure exp_map(const DiscreteMeasure& logged) {
  DiscreteMeasure out = logged;
  out.coeffs = (-logged.coeffs.array()).exp();
  out.signed_ = false;
  return out;
}

DiscreteMeasure additive_shift(const DiscreteMeasure& logged, const StepFunctiond& f) {
  if (std::abs(f.mean()) > 1e-12) throw PreconditionError("additive_shift: shift must have zero mean");
  DiscreteMeasure out = logged;
  for (Eigen::Index k = 0; k < out.coeffs.size(); ++k) out.coeffs[k] += f(logged.locations[k]);
  return out;
}

}  // namespace lebesgue

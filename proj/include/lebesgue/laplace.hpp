#ifndef LEBESGUE_LAPLACE_HPP
#define LEBESGUE_LAPLACE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "lebesgue/errors.hpp"
#include "lebesgue/measures.hpp"
#include "lebesgue/step_function.hpp"

namespace lebesgue {

// Characteristic functionals and finite-dimensional densities. Everything in
// this first block is scalar-generic; the quadrature and Monte Carlo parts
// below work in double.

/// Phi_theta(f) = exp(-theta sum_k m_k ln f_k), f positive.
template <typename Scalar>
Scalar phi_theta(const StepFunction<Scalar>& f, Scalar theta) {
  if (!f.positive()) throw DomainError("phi_theta: test function must be positive");
  using std::exp;
  return exp(-theta * f.mean_log_abs());
}

/// exp(-theta sum_k m_k ln|f_k|), f nonvanishing.
template <typename Scalar>
Scalar phi_theta_signed(const StepFunction<Scalar>& f, Scalar theta) {
  if (!f.nonvanishing()) throw DomainError("phi_theta_signed: test function vanishes on a cell");
  using std::exp;
  return exp(-theta * f.mean_log_abs());
}

/// prod_k x_k^(theta m_k - 1) / Gamma(theta m_k)
template <typename Scalar>
Scalar finite_dim_density(const Vector<Scalar>& x, const MeshPartition<Scalar>& partition, Scalar theta) {
  if (x.size() != partition.size()) throw ParameterError("finite_dim_density: dimension mismatch");
  if ((x.array() <= Scalar(0)).any()) throw DomainError("finite_dim_density: coordinates must be positive");
  using std::exp;
  using std::lgamma;
  using std::log;
  Scalar log_density(0);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const Scalar a = theta * partition.mass(k);
    log_density += (a - Scalar(1)) * log(x[k]) - lgamma(a);
  }
  return exp(log_density);
}

/// prod_k f_k^(-theta m_k). Cross-checked against phi_theta at 1e-12 relative.
template <typename Scalar>
Scalar finite_dim_laplace_analytic(const StepFunction<Scalar>& f, Scalar theta) {
  if (!f.positive()) throw DomainError("finite_dim_laplace_analytic: test function must be positive");
  using std::abs;
  using std::pow;
  Scalar product(1);
  for (Eigen::Index k = 0; k < f.size(); ++k) product *= pow(f.values()[k], -theta * f.partition().mass(k));
  const Scalar reference = phi_theta(f, theta);
  if (abs(product - reference) > Scalar(1e-12) * reference) {
    throw PreconditionError("finite_dim_laplace_analytic: product form disagrees with phi_theta");
  }
  return product;
}

template <typename Scalar>
struct InvarianceReport {
  Scalar lhs;     // Phi(a f)
  Scalar rhs;     // Phi(f) exp(-theta sum m ln a)
  Scalar factor;  // exp(-theta sum m ln a)
  Scalar relative_error;
};

template <typename Scalar>
InvarianceReport<Scalar> multiplier_invariance_check(const StepFunction<Scalar>& f, const StepFunction<Scalar>& a,
                                                     Scalar theta) {
  using std::abs;
  using std::exp;
  InvarianceReport<Scalar> r;
  r.lhs = phi_theta(a * f, theta);
  r.factor = exp(-theta * a.mean_log_abs());
  r.rhs = phi_theta(f, theta) * r.factor;
  r.relative_error = abs(r.lhs - r.rhs) / r.rhs;
  return r;
}

// Quadrature oracles.

struct QuadratureValue {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
};

/// Quadrature of the Laplace integral of L_{theta, partition} at f. The
/// integrand factorizes over cells, so this is a product of one-dimensional
/// integrals, each truncated where the Gamma tail Q(theta m_k, f_k U) < tail.
QuadratureValue finite_dim_laplace_quadrature(const StepFunctiond& f, double theta, double tail = 1e-12);

struct MergeRow {
  double s = 0.0;
  double quadrature = 0.0;
  double closed_form = 0.0;
  double abs_error = 0.0;
};

/// Density of x_i + x_j under L_{theta, partition}, by quadrature of the
/// convolution, against s^(theta(m_i+m_j)-1)/Gamma(theta(m_i+m_j)).
std::vector<MergeRow> refinement_merge_check(const MeshPartitiond& partition, double theta, Eigen::Index i,
                                             Eigen::Index j, const std::vector<double>& s_grid);

// Importance estimators over a weighted ensemble.

struct LaplaceEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;  // NaN when the variance guard trips
  bool variance_warning = false;
  std::size_t samples = 0;
};

/// (1/N) sum_i exp(log_weight_i) g(xi_i) over all samples with jackknife error.
LaplaceEstimate empirical_functional(const WeightedEnsemble& ens,
                                     const std::function<double(const DiscreteMeasure&)>& log_integrand);

/// Importance estimate of the Laplace transform of L_theta at f (all f_k > 1/2 for finite variance).
LaplaceEstimate empirical_laplace(const WeightedEnsemble& ens, const StepFunctiond& f);

/// Laplace estimate after pushing every sample through a map.
LaplaceEstimate empirical_laplace_pushed(const WeightedEnsemble& ens, const StepFunctiond& f,
                                         const std::function<DiscreteMeasure(const DiscreteMeasure&)>& push);

/// Signed samples, modulus pairing sum |f(x_k)| |c_k|; targets Phi_theta(|f|).
LaplaceEstimate empirical_laplace_signed(const WeightedEnsemble& signed_ens, const StepFunctiond& f);

}  // namespace lebesgue

#endif  // LEBESGUE_LAPLACE_HPP

#ifndef LEBESGUE_SPECIAL_HPP
#define LEBESGUE_SPECIAL_HPP

namespace lebesgue {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without cancellation.
double regularized_gamma_q(double a, double x);

/// CDF of Gamma(shape, 1).
inline double gamma_cdf(double shape, double x) { return x <= 0.0 ? 0.0 : regularized_gamma_p(shape, x); }

double normal_cdf(double x, double sigma = 1.0);

/// Modified Bessel function K0 by its ascending series (accurate for moderate x).
double bessel_k0_series(double x);

/// Upper limit U with Q(shape, rate * U) below tail.
double gamma_tail_cutoff(double shape, double rate, double tail);

}  // namespace lebesgue

#endif  // LEBESGUE_SPECIAL_HPP

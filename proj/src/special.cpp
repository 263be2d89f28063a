#include "lebesgue/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lebesgue/errors.hpp"

namespace lebesgue {

namespace {

// Series for P(a, x), good for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), good for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw ParameterError("regularized_gamma_p: a must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw ParameterError("regularized_gamma_q: a must be positive");
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

double bessel_k0_series(double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k0_series: x must be positive");
  const double q = 0.25 * x * x;
  double term = 1.0;  // (q^k / k!^2)
  double i0 = 1.0;
  double harmonic = 0.0;
  double tail = 0.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    i0 += term;
    tail += term * harmonic;
    if (term * (1.0 + harmonic) < 1e-18 * (i0 + tail)) break;
  }
  return -(std::log(0.5 * x) + kEulerGamma) * i0 + tail;
}

double gamma_tail_cutoff(double shape, double rate, double tail) {
  double upper = std::max(1.0, shape) / rate;
  while (regularized_gamma_q(shape, rate * upper) >= tail) upper *= 2.0;
  double lower = 0.0;
  for (int i = 0; i < 200 && upper - lower > 1e-12 * upper; ++i) {
    const double mid = 0.5 * (lower + upper);
    if (regularized_gamma_q(shape, rate * mid) >= tail) lower = mid;
    else upper = mid;
  }
  return upper;
}

}  // namespace lebesgue

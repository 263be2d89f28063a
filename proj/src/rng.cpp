#include "lebesgue/rng.hpp"

#include <cmath>
#include <numbers>

#include "lebesgue/errors.hpp"

namespace lebesgue {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kEulerGamma = 0.57721566490153286061;

}  // namespace

std::array<std::uint64_t, 4> RngStream::philox_block(std::array<std::uint64_t, 4> ctr,
                                                     std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : key_{seed, stream_id} {}

void RngStream::refill() {
  buffer_ = philox_block({block_, 0, 0, 0}, key_);
  ++block_;
  used_ = 0;
}

RngStream::result_type RngStream::operator()() {
  if (used_ == 4) refill();
  return buffer_[used_++];
}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t bits = (*this)() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(key_[0], splitmix64(key_[1] ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

double standard_normal(RngStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double exponential_variate(RngStream& rng) { return -std::log(rng.uniform()); }

double gamma_variate(RngStream& rng, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw ParameterError("gamma_variate: shape must be positive and finite");
  }
  if (shape < 1.0) {
    const double boosted = gamma_variate(rng, shape + 1.0);
    return boosted * std::pow(rng.uniform(), 1.0 / shape);
  }
  if (shape == 1.0) return exponential_variate(rng);

  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta_variate(RngStream& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("beta_variate: parameters must be positive");
  if (a == 1.0) return -std::expm1(std::log(rng.uniform()) / b);  // 1 - U^(1/b)
  if (b == 1.0) return std::pow(rng.uniform(), 1.0 / a);
  const double x = gamma_variate(rng, a);
  const double y = gamma_variate(rng, b);
  return x / (x + y);
}

double exp_integral_E1(double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral_E1: x must be positive");
  if (x < 1.0) {
    // -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
    double sum = 0.0;
    double power_over_fact = 1.0;
    for (int k = 1; k < 200; ++k) {
      power_over_fact *= -x / k;
      const double term = -power_over_fact / k;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return -kEulerGamma - std::log(x) + sum;
  }
  // Modified Lentz on the continued fraction e^-x / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...))).
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

double inverse_levy_tail(double theta, double gamma_arrival) {
  if (!(theta > 0.0)) throw ParameterError("inverse_levy_tail: theta must be positive");
  if (!(gamma_arrival > 0.0)) throw ParameterError("inverse_levy_tail: arrival must be positive");
  const double target = gamma_arrival / theta;
  const double log_target = std::log(target);

  // Newton in u = ln J on phi(u) = ln E1(e^u) - ln target, which is strictly decreasing.
  double j0;
  if (target >= 1.0) {
    j0 = std::exp(-target - kEulerGamma);
  } else {
    const double l = -log_target;
    j0 = std::max(l - std::log(std::max(l, 1.0)), 0.3);
  }
  double u = std::log(j0);
  double lo = -std::numeric_limits<double>::infinity();  // phi > 0 side
  double hi = std::numeric_limits<double>::infinity();   // phi < 0 side
  for (int iter = 0; iter < 200; ++iter) {
    const double j = std::exp(u);
    // Below ~1e-300 the series reduces to -gamma - ln J; this also covers J underflowing to 0.
    const double e1 = u < -690.0 ? -kEulerGamma - u : exp_integral_E1(j);
    const double phi = std::log(e1) - log_target;
    if (phi > 0.0) lo = std::max(lo, u);
    else if (phi < 0.0) hi = std::min(hi, u);
    else return j;
    const double slope = -std::exp(-j) / e1;
    double next = u - phi / slope;
    if (!(next > lo && next < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
      else next = std::isfinite(lo) ? u + 1.0 : u - 1.0;
    }
    if (std::abs(next - u) <= 1e-15 * std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  return std::exp(u);
}

ArrivalSequence poisson_arrivals(RngStream& rng, std::size_t count) {
  if (count == 0) throw ParameterError("poisson_arrivals: count must be at least 1");
  ArrivalSequence out;
  out.gammas.resize(static_cast<Eigen::Index>(count));
  double t = 0.0;
  for (Eigen::Index k = 0; k < out.gammas.size(); ++k) {
    t += exponential_variate(rng);
    out.gammas[k] = t;
  }
  return out;
}

int random_sign(RngStream& rng) { return (rng() >> 63) ? 1 : -1; }

Eigen::VectorXd unit_direction(RngStream& rng, int d) {
  if (d < 1) throw ParameterError("unit_direction: dimension must be at least 1");
  Eigen::VectorXd v(d);
  if (d == 1) {
    v[0] = random_sign(rng);
    return v;
  }
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = standard_normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

}  // namespace lebesgue

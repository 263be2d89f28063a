#ifndef LEBESGUE_RNG_HPP
#define LEBESGUE_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace lebesgue {

/// Counter-based Philox4x64-10 stream keyed by (seed, stream_id).
///
/// A stream is a plain value: copying it forks the sequence, and two streams
/// with equal keys and equal positions produce identical variates. Distinct
/// stream ids share no state, so workers can each own one.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  /// Child stream: same seed, stream id derived from (stream_id, index).
  RngStream split(std::uint64_t index) const;

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }

  /// Raw Philox4x64-10 block function, exposed for known-answer tests.
  static std::array<std::uint64_t, 4> philox_block(std::array<std::uint64_t, 4> counter,
                                                   std::array<std::uint64_t, 2> key);

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int used_ = 4;
};

/// Strictly increasing arrival times of a unit-rate Poisson process.
struct ArrivalSequence {
  Eigen::VectorXd gammas;
};

double standard_normal(RngStream& rng);
double exponential_variate(RngStream& rng);

/// Gamma(shape, 1). Sub-unit shapes use Gamma(a) = Gamma(a + 1) * U^(1/a).
double gamma_variate(RngStream& rng, double shape);

double beta_variate(RngStream& rng, double a, double b);

/// E1(x) = integral from x to infinity of exp(-u)/u du, for x > 0.
double exp_integral_E1(double x);

/// The J > 0 solving theta * E1(J) = gamma_arrival. Returns 0 once J underflows
/// (gamma_arrival / theta above about 745).
double inverse_levy_tail(double theta, double gamma_arrival);

ArrivalSequence poisson_arrivals(RngStream& rng, std::size_t count);

int random_sign(RngStream& rng);

/// Uniform point on the unit (d-1)-sphere; d = 1 gives a random sign.
Eigen::VectorXd unit_direction(RngStream& rng, int d);

}  // namespace lebesgue

#endif  // LEBESGUE_RNG_HPP

#ifndef LEBESGUE_UNIVERSALITY_HPP
#define LEBESGUE_UNIVERSALITY_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lebesgue/rng.hpp"
#include "lebesgue/stats.hpp"

namespace lebesgue {

// Random permutations.

struct CycleProfile {
  int n = 0;
  std::vector<int> cycle_lengths;  // descending, summing to n

  Eigen::VectorXd normalized() const;
};

/// Cycle type of an Ewens(theta) permutation of n points (Chinese restaurant construction).
CycleProfile ewens_cycles(RngStream& rng, int n, double theta);

// Prime factorizations.

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
bool is_prime(std::uint64_t n);

/// Prime factors with multiplicity, ascending.
std::vector<std::uint64_t> factorize(std::uint64_t n);

struct PrimeProfile {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> primes;  // descending, with multiplicity
  Eigen::VectorXd components;         // ln p_i / ln n, descending
};

PrimeProfile prime_profile(std::uint64_t n);

struct PrimeExperimentReport {
  std::uint64_t n_max = 0;
  std::size_t samples = 0;
  double sup_distance = 0.0;          // largest component ECDF vs rho(1/u)
  double fraction_above_half = 0.0;   // P(largest component > 1/2)
  std::vector<PrimeProfile> profiles; // kept only when requested
};

PrimeExperimentReport prime_universality_experiment(const RngStream& rng, std::uint64_t n_max,
                                                    std::size_t samples, bool keep_profiles = false,
                                                    unsigned threads = 1);

// Dickman function.

/// rho(u) = 1 on [0, 1], u rho'(u) = -rho(u - 1). RK4 on a grid aligned with
/// the integer knots, refined by step doubling; cubic Hermite dense output
/// supplies the delayed values.
class DickmanSolver {
 public:
  explicit DickmanSolver(double u_max = 40.0, double tolerance = 1e-13);

  double operator()(double u) const;
  double u_max() const { return u_max_; }
  int steps_per_unit() const { return steps_per_unit_; }

 private:
  void solve(int steps_per_unit);
  double interpolate(double u) const;

  double u_max_;
  int steps_per_unit_ = 0;
  double h_ = 0.0;
  std::vector<double> values_;       // rho at 1 + j h
  std::vector<double> derivatives_;  // rho' at 1 + j h
};

/// Shared memoized solver; read-only after first use.
double dickman_rho(double u);

/// Independent evaluation for u <= 4: rho(u) = rho(k) - int_k^u rho(t - 1) / t dt,
/// each delayed value obtained by the same nested adaptive quadrature.
double dickman_rho_quadrature(double u);

// Poisson-Dirichlet statistics.

/// Monte Carlo mean of the largest PD(theta) part.
stats::MeanEstimate largest_part_mean(const RngStream& rng, double theta, std::size_t samples,
                                      unsigned threads = 1);

/// Largest parts of `samples` PD(theta) draws by sorted stick breaking.
std::vector<double> pd_largest_parts(const RngStream& rng, double theta, std::size_t samples, unsigned threads = 1);

/// Largest parts of normalized subordinator jumps.
std::vector<double> jump_largest_parts(const RngStream& rng, double theta, std::size_t samples,
                                       unsigned threads = 1);

/// Largest cycle over n for Ewens(theta) permutations.
std::vector<double> cycle_largest_parts(const RngStream& rng, int n, double theta, std::size_t samples,
                                        unsigned threads = 1);

// Thinning of the gamma subordinator.

struct ThinningReport {
  double theta = 0.0;
  int classes = 1;
  std::size_t samples = 0;
  double window = 0.0;
  std::vector<double> ks_per_class;     // vs Gamma(theta / r)
  double ks_critical_1pct = 0.0;
  double max_abs_correlation = 0.0;     // over class pairs
  double correlation_bound = 0.0;       // 3 / sqrt(N)
  std::size_t accepted = 0;             // samples with every class sum <= window
  double effective_sample_size = 0.0;
  double weighted_sup_distance = 0.0;   // weighted joint ECDF vs prod (s_i / M)^{theta/r}
  std::vector<std::vector<double>> class_sums;  // [class][sample]
};

ThinningReport thinning_partition_test(const RngStream& rng, double theta, int classes, std::size_t samples,
                                       double window, unsigned threads = 1);

}  // namespace lebesgue

#endif  // LEBESGUE_UNIVERSALITY_HPP

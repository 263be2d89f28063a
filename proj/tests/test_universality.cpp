#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "lebesgue/errors.hpp"
#include "lebesgue/measures.hpp"
#include "lebesgue/special.hpp"
#include "lebesgue/stats.hpp"
#include "lebesgue/universality.hpp"

namespace lebesgue {
namespace {

// Mean cycle count over all permutations of n points, by enumeration.
double enumerated_mean_cycles(int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double total = 0.0, count = 0.0;
  do {
    std::vector<char> seen(perm.size(), 0);
    int cycles = 0;
    for (int i = 0; i < n; ++i) {
      if (seen[static_cast<std::size_t>(i)]) continue;
      ++cycles;
      for (int j = i; !seen[static_cast<std::size_t>(j)]; j = perm[static_cast<std::size_t>(j)]) seen[static_cast<std::size_t>(j)] = 1;
    }
    total += cycles;
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total / count;
}

// Independent composite Simpson integration of u rho'(u) = -rho(u - 1) on a fine grid,
// using rho(u) = rho(k) - int_k^u rho(t - 1)/t dt unit by unit.
double simpson_dickman(double u_target) {
  const int per_unit = 4000;
  const double h = 1.0 / per_unit;
  const int units = static_cast<int>(std::ceil(u_target)) + 1;
  std::vector<double> rho(static_cast<std::size_t>(units * per_unit + 1), 1.0);
  for (int i = per_unit + 1; i <= units * per_unit; ++i) {
    // Integrate rho(t-1)/t over [t_{i-1}, t_i] with Simpson on the half-step,
    // taking the delayed midpoint value by cubic interpolation of earlier nodes.
    const double a = (i - 1) * h, b = i * h, m = 0.5 * (a + b);
    const int base = i - 1 - per_unit;
    auto delayed = [&](int j) { return rho[static_cast<std::size_t>(std::max(j, 0))]; };
    const double mid = (-delayed(base - 1) + 9.0 * delayed(base) + 9.0 * delayed(base + 1) - delayed(base + 2)) / 16.0;
    const double integral = (b - a) / 6.0 * (delayed(base) / a + 4.0 * mid / m + delayed(base + 1) / b);
    rho[static_cast<std::size_t>(i)] = rho[static_cast<std::size_t>(i - 1)] - integral;
  }
  const double pos = u_target * per_unit;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return frac == 0.0 ? rho[i] : (1.0 - frac) * rho[i] + frac * rho[i + 1];
}

TEST(EwensCycles, LengthsSumToNAndDescend) {
  RngStream rng(71, 0);
  for (double theta : {0.5, 1.0, 3.0}) {
    for (int n : {1, 2, 10, 1000}) {
      const CycleProfile p = ewens_cycles(rng, n, theta);
      EXPECT_EQ(std::accumulate(p.cycle_lengths.begin(), p.cycle_lengths.end(), 0), n);
      EXPECT_TRUE(std::is_sorted(p.cycle_lengths.begin(), p.cycle_lengths.end(), std::greater<>()));
      EXPECT_NEAR(p.normalized().sum(), 1.0, 1e-12);
    }
  }
}

TEST(EwensCycles, MeanCycleCountOfFourPoints) {
  const double oracle = enumerated_mean_cycles(4);
  ASSERT_NEAR(oracle, 25.0 / 12.0, 1e-15);
  RngStream rng(71, 1);
  std::vector<double> counts(100000);
  for (auto& c : counts) c = static_cast<double>(ewens_cycles(rng, 4, 1.0).cycle_lengths.size());
  const auto est = stats::mc_mean_stderr(counts);
  EXPECT_NEAR(est.mean, oracle, 3.0 * est.stderr_);
}

TEST(EwensCycles, MeanCycleCountFollowsTheta) {
  // E[K_n] = sum_{i<n} theta / (theta + i).
  const int n = 50;
  for (double theta : {0.5, 2.0}) {
    double oracle = 0.0;
    for (int i = 0; i < n; ++i) oracle += theta / (theta + i);
    RngStream rng(71, static_cast<std::uint64_t>(theta * 10));
    std::vector<double> counts(50000);
    for (auto& c : counts) c = static_cast<double>(ewens_cycles(rng, n, theta).cycle_lengths.size());
    const auto est = stats::mc_mean_stderr(counts);
    EXPECT_NEAR(est.mean, oracle, 3.0 * est.stderr_) << "theta=" << theta;
  }
}

TEST(EwensCycles, LargestCycleMatchesStickBreaking) {
  const auto cycles = cycle_largest_parts(RngStream(72, 0), 10000, 1.0, 10000);
  const auto sticks = largest_part_mean(RngStream(72, 1), 1.0, 100000);
  const auto est = stats::mc_mean_stderr(cycles);
  EXPECT_NEAR(est.mean, sticks.mean, 3.0 * std::hypot(est.stderr_, sticks.stderr_));
}

TEST(EwensCycles, RejectsBadParameters) {
  RngStream rng(1, 1);
  EXPECT_THROW(ewens_cycles(rng, 0, 1.0), ParameterError);
  EXPECT_THROW(ewens_cycles(rng, 5, 0.0), ParameterError);
}

TEST(Factorization, ExhaustiveRecompositionUpToOneMillion) {
  for (std::uint64_t n = 1; n <= 1000000; ++n) {
    const auto f = factorize(n);
    std::uint64_t product = 1;
    for (std::size_t i = 0; i < f.size(); ++i) {
      product *= f[i];
      if (i > 0) ASSERT_LE(f[i - 1], f[i]);
    }
    ASSERT_EQ(product, n);
  }
}

TEST(Factorization, PrimalityAgreesWithSieve) {
  const std::size_t limit = 200000;
  std::vector<char> composite(limit + 1, 0);
  for (std::size_t p = 2; p * p <= limit; ++p) {
    if (composite[p]) continue;
    for (std::size_t q = p * p; q <= limit; q += p) composite[q] = 1;
  }
  for (std::size_t n = 2; n <= limit; ++n) ASSERT_EQ(is_prime(n), !composite[n]) << n;
}

TEST(Factorization, LargeSemiprimesAndPrimes) {
  EXPECT_TRUE(is_prime(1000000007ULL));
  EXPECT_TRUE(is_prime(18446744073709551557ULL));
  EXPECT_FALSE(is_prime(3215031751ULL));  // strong pseudoprime to bases 2, 3, 5, 7
  const auto f = factorize(1000000007ULL * 998244353ULL);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0], 998244353ULL);
  EXPECT_EQ(f[1], 1000000007ULL);
  const auto g = factorize(4294967291ULL * 4294967279ULL);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0] * g[1], 4294967291ULL * 4294967279ULL);
}

TEST(PrimeProfile, Twelve) {
  const auto p = prime_profile(12);
  ASSERT_EQ(p.components.size(), 3);
  EXPECT_NEAR(p.components[0], 0.44211, 1e-5);
  EXPECT_NEAR(p.components[1], 0.27894, 1e-5);
  EXPECT_NEAR(p.components[2], 0.27894, 1e-5);
  EXPECT_EQ(p.primes, (std::vector<std::uint64_t>{3, 2, 2}));
}

TEST(PrimeProfile, ComponentsSumToOne) {
  RngStream rng(73, 0);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t n = 2 + rng() % 1000000000000ULL;
    const auto p = prime_profile(n);
    EXPECT_NEAR(p.components.sum(), 1.0, 1e-12) << n;
    for (Eigen::Index k = 0; k < p.components.size(); ++k) {
      EXPECT_GT(p.components[k], 0.0);
      EXPECT_LE(p.components[k], 1.0);
      if (k > 0) EXPECT_LE(p.components[k], p.components[k - 1]);
    }
  }
}

TEST(PrimeProfile, PrimeHasSingleUnitComponent) {
  for (std::uint64_t p : {2ULL, 97ULL, 1000003ULL, 1000000007ULL}) {
    const auto prof = prime_profile(p);
    ASSERT_EQ(prof.components.size(), 1);
    EXPECT_EQ(prof.components[0], 1.0);
  }
}

TEST(PrimeProfile, RejectsSmallArguments) {
  EXPECT_THROW(prime_profile(1), ParameterError);
  EXPECT_THROW(prime_profile(0), ParameterError);
}

TEST(PrimeExperiment, DistanceImprovesWithRange) {
  const auto small = prime_universality_experiment(RngStream(74, 0), 10000, 100000);
  const auto large = prime_universality_experiment(RngStream(74, 1), 10000000, 100000);
  EXPECT_LT(large.sup_distance, small.sup_distance);
}

TEST(Dickman, UnitOnFirstInterval) {
  for (double u : {0.0, 0.5, 1.0}) EXPECT_EQ(dickman_rho(u), 1.0);
}

TEST(Dickman, SecondIntervalClosedForm) {
  EXPECT_NEAR(dickman_rho(2.0), 1.0 - std::log(2.0), 1e-9);
  for (double u : {1.2, 1.5, 1.9}) EXPECT_NEAR(dickman_rho(u), 1.0 - std::log(u), 1e-12);
}

TEST(Dickman, ThirdIntervalAgainstIndependentIntegrators) {
  const double rk = dickman_rho(3.0);
  EXPECT_NEAR(rk, dickman_rho_quadrature(3.0), 1e-8);
  EXPECT_NEAR(rk, simpson_dickman(3.0), 1e-8);
  EXPECT_NEAR(rk, 0.0486083882911, 1e-10);
}

TEST(Dickman, KnownValuesFurtherOut) {
  EXPECT_NEAR(dickman_rho(4.0), 0.00491092564776, 1e-11);
  EXPECT_NEAR(dickman_rho(5.0), 0.000354724700456, 1e-12);
  EXPECT_NEAR(dickman_rho(10.0), 2.77017183772596e-11, 1e-15);
}

TEST(Dickman, MonotoneDecreasing) {
  double prev = 1.0;
  for (double u = 1.05; u <= 12.0; u += 0.05) {
    const double v = dickman_rho(u);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(LargestPart, GolombDickmanMean) {
  const auto est = largest_part_mean(RngStream(75, 0), 1.0, 1000000);
  EXPECT_NEAR(est.mean, 0.6243299885, 3.0 * est.stderr_);
}

TEST(LargestPart, StableAcrossDisjointSeedBatches) {
  const auto a = largest_part_mean(RngStream(75, 1), 1.0, 200000);
  const auto b = largest_part_mean(RngStream(75, 2), 1.0, 200000);
  EXPECT_NEAR(a.mean, b.mean, 3.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST(LargestPart, LargerThetaFragmentsMass) {
  const auto one = largest_part_mean(RngStream(75, 3), 1.0, 100000);
  const auto two = largest_part_mean(RngStream(75, 4), 2.0, 100000);
  EXPECT_LT(two.mean + 3.0 * std::hypot(one.stderr_, two.stderr_), one.mean);
}

TEST(LargestPart, BoundedByOneAndAverage) {
  RngStream rng(75, 5);
  for (int i = 0; i < 2000; ++i) {
    const auto p = pd_sample(rng, 1.0, 4096, 1e-10);
    EXPECT_LE(p.terms[0], 1.0);
    EXPECT_GE(p.terms[0], p.terms.mean());
  }
}

TEST(LargestPart, DickmanCdfMatchesStickBreaking) {
  auto largest = pd_largest_parts(RngStream(76, 0), 1.0, 100000);
  const double d = stats::ks_statistic_unsorted(largest, [](double u) { return u <= 0.0 ? 0.0 : dickman_rho(1.0 / u); });
  EXPECT_LT(d, stats::ks_critical_one_sample(largest.size(), 0.01));
}

TEST(LargestPart, TriangleOfConstructions) {
  const std::size_t n = 10000;
  const auto gem = pd_largest_parts(RngStream(77, 0), 1.0, n);
  const auto jumps = jump_largest_parts(RngStream(77, 1), 1.0, n);
  const auto cycles = cycle_largest_parts(RngStream(77, 2), 10000, 1.0, n);
  const double crit = stats::ks_critical_two_sample(n, n, 0.01);
  EXPECT_LT(stats::ks_two_sample(gem, jumps), crit);
  EXPECT_LT(stats::ks_two_sample(gem, cycles), crit);
  EXPECT_LT(stats::ks_two_sample(jumps, cycles), crit);
}

TEST(LargestPart, DickmanIdentity) { EXPECT_NEAR(1.0 - dickman_rho(2.0), std::log(2.0), 1e-9); }

TEST(Thinning, SingleClassIsTotalMassTest) {
  const auto rep = thinning_partition_test(RngStream(78, 0), 1.0, 1, 50000, 2.0);
  ASSERT_EQ(rep.ks_per_class.size(), 1u);
  EXPECT_LT(rep.ks_per_class[0], rep.ks_critical_1pct);
  EXPECT_EQ(rep.max_abs_correlation, 0.0);
  EXPECT_LT(rep.weighted_sup_distance, 0.02);
}

TEST(Thinning, TwoClassesThetaOne) {
  const auto rep = thinning_partition_test(RngStream(78, 1), 1.0, 2, 100000, 2.0);
  for (double ks : rep.ks_per_class) EXPECT_LT(ks, rep.ks_critical_1pct);
  EXPECT_LT(rep.max_abs_correlation, rep.correlation_bound);
  EXPECT_LT(rep.weighted_sup_distance, 0.02);
}

TEST(Thinning, MergingFourClassesReproducesTwo) {
  const std::size_t n = 50000;
  const auto four = thinning_partition_test(RngStream(78, 2), 1.0, 4, n, 2.0);
  const auto two = thinning_partition_test(RngStream(78, 3), 1.0, 2, n, 2.0);
  std::vector<double> merged_a(n), merged_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    merged_a[i] = four.class_sums[0][i] + four.class_sums[1][i];
    merged_b[i] = four.class_sums[2][i] + four.class_sums[3][i];
  }
  const double crit = stats::ks_critical_two_sample(n, n, 0.01);
  EXPECT_LT(stats::ks_two_sample(merged_a, two.class_sums[0]), crit);
  EXPECT_LT(stats::ks_two_sample(merged_b, two.class_sums[1]), crit);
  for (double ks : four.ks_per_class) EXPECT_LT(ks, four.ks_critical_1pct);
}

TEST(Thinning, RejectsBadParameters) {
  EXPECT_THROW(thinning_partition_test(RngStream(1, 1), 1.0, 0, 100, 2.0), ParameterError);
  EXPECT_THROW(thinning_partition_test(RngStream(1, 1), 1.0, 2, 100, 0.0), ParameterError);
}

}  // namespace
}  // namespace lebesgue

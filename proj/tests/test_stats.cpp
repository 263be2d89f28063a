#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "lebesgue/rng.hpp"
#include "lebesgue/special.hpp"
#include "lebesgue/stats.hpp"

namespace lebesgue {
namespace {

// O(N^2) oracle: evaluate both one-sided ECDF limits at every sample point by counting.
double brute_force_ks(const std::vector<double>& sample, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (double x : sample) {
    double below = 0.0, at_or_below = 0.0;
    for (double y : sample) {
      below += (y < x);
      at_or_below += (y <= x);
    }
    d = std::max({d, std::abs(at_or_below / n - cdf(x)), std::abs(below / n - cdf(x))});
  }
  return d;
}

double brute_force_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> points = a;
  points.insert(points.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : points) {
    double fa = 0.0, fb = 0.0;
    for (double y : a) fa += (y <= x);
    for (double y : b) fb += (y <= x);
    d = std::max(d, std::abs(fa / a.size() - fb / b.size()));
  }
  return d;
}

TEST(KsStatistic, OwnCdfBelowOnePercentCritical) {
  RngStream rng(21, 0);
  const std::size_t n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) v = exponential_variate(rng);
  const double d = stats::ks_statistic_unsorted(x, [](double t) { return 1.0 - std::exp(-t); });
  EXPECT_LT(d, 1.95 / std::sqrt(double(n)));
}

TEST(KsStatistic, SinglePointAgainstUniform) {
  const std::vector<double> x{0.5};
  EXPECT_DOUBLE_EQ(stats::ks_statistic(x, [](double t) { return std::clamp(t, 0.0, 1.0); }), 0.5);
}

TEST(KsStatistic, DisjointSupportGivesOne) {
  std::vector<double> x{10.1, 10.5, 10.9};
  EXPECT_DOUBLE_EQ(stats::ks_statistic(x, [](double t) { return std::clamp(t, 0.0, 1.0); }), 1.0);
}

TEST(KsStatistic, EmptySampleThrows) {
  std::vector<double> x;
  EXPECT_ANY_THROW(stats::ks_statistic(x, [](double t) { return t; }));
}

TEST(KsStatistic, AgreesWithBruteForceOnSmallInputs) {
  RngStream rng(21, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<double> x(n);
    // Rounded values force ties.
    for (auto& v : x) v = std::round(gamma_variate(rng, 1.5) * 8.0) / 8.0;
    std::sort(x.begin(), x.end());
    auto cdf = [](double t) { return gamma_cdf(1.5, t); };
    EXPECT_NEAR(stats::ks_statistic(x, cdf), brute_force_ks(x, cdf), 1e-14) << "n=" << n;
  }
}

TEST(KsTwoSample, IdenticalSamplesGiveZero) {
  std::vector<double> a{0.3, 0.1, 0.7, 0.7};
  EXPECT_DOUBLE_EQ(stats::ks_two_sample(a, a), 0.0);
}

TEST(KsTwoSample, SeparatedPointsGiveOne) { EXPECT_DOUBLE_EQ(stats::ks_two_sample({0.2}, {0.8}), 1.0); }

TEST(KsTwoSample, EmptyInputThrows) { EXPECT_ANY_THROW(stats::ks_two_sample({}, {1.0})); }

TEST(KsTwoSample, AgreesWithBruteForceOnSmallInputs) {
  RngStream rng(21, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 200, m = 1 + rng() % 200;
    std::vector<double> a(n), b(m);
    for (auto& v : a) v = std::round(standard_normal(rng) * 4.0);
    for (auto& v : b) v = std::round((standard_normal(rng) + 0.3) * 4.0);
    EXPECT_NEAR(stats::ks_two_sample(a, b), brute_force_two_sample(a, b), 1e-14);
  }
}

TEST(KsTwoSample, NullCalibrationAtOnePercent) {
  int passes = 0;
  const std::size_t n = 10000;
  const double crit = stats::ks_critical_two_sample(n, n, 0.01);
  for (int rep = 0; rep < 100; ++rep) {
    RngStream rng(22, static_cast<std::uint64_t>(rep));
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = exponential_variate(rng);
    for (auto& v : b) v = exponential_variate(rng);
    passes += stats::ks_two_sample(a, b) < crit;
  }
  EXPECT_GE(passes, 98);
}

TEST(KsCritical, KolmogorovCoefficients) {
  EXPECT_NEAR(stats::kolmogorov_coefficient(0.05), 1.3581, 1e-4);
  EXPECT_NEAR(stats::kolmogorov_coefficient(0.01), 1.6276, 1e-4);
  EXPECT_NEAR(stats::ks_critical_two_sample(100, 100, 0.05), 1.3581 * std::sqrt(0.02), 1e-4);
}

TEST(WeightedEcdf, UnitWeightsGiveOrdinaryEcdf) {
  const std::vector<double> v{3.0, 1.0, 2.0, 2.0};
  const std::vector<double> w(4, 1.0);
  const auto e = stats::weighted_ecdf(v, w);
  EXPECT_DOUBLE_EQ(e(0.5), 0.0);
  EXPECT_DOUBLE_EQ(e(1.0), 0.25);
  EXPECT_DOUBLE_EQ(e(2.0), 0.75);
  EXPECT_DOUBLE_EQ(e(3.5), 1.0);
}

TEST(WeightedEcdf, ScaleInvariantInWeights) {
  RngStream rng(23, 0);
  std::vector<double> v(500), w(500), w2(500);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = standard_normal(rng);
    w[i] = rng.uniform();
    w2[i] = 2.0 * w[i];
  }
  const auto a = stats::weighted_ecdf(v, w), b = stats::weighted_ecdf(v, w2);
  for (double x = -3.0; x <= 3.0; x += 0.01) EXPECT_NEAR(a(x), b(x), 1e-15);
}

TEST(WeightedEcdf, TwoPointArithmetic) {
  const std::vector<double> v{1.0, 2.0}, w{1.0, 3.0};
  const auto e = stats::weighted_ecdf(v, w);
  EXPECT_DOUBLE_EQ(e(1.0), 0.25);
  EXPECT_DOUBLE_EQ(e(2.0), 1.0);
  ASSERT_EQ(e.cumulative().size(), 2u);
  EXPECT_DOUBLE_EQ(e.cumulative()[0], 0.25);
}

TEST(WeightedEcdf, CumulativeMonotoneFromZeroToOne) {
  RngStream rng(23, 1);
  std::vector<double> v(1000), w(1000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = rng.uniform();
    w[i] = rng.uniform() < 0.2 ? 0.0 : exponential_variate(rng);
  }
  const auto e = stats::weighted_ecdf(v, w);
  EXPECT_TRUE(std::is_sorted(e.values().begin(), e.values().end()));
  EXPECT_TRUE(std::is_sorted(e.cumulative().begin(), e.cumulative().end()));
  EXPECT_GE(e.cumulative().front(), 0.0);
  EXPECT_NEAR(e.cumulative().back(), 1.0, 1e-14);
}

TEST(WeightedEcdf, AllZeroWeightsThrow) {
  const std::vector<double> v{1.0, 2.0}, w{0.0, 0.0};
  EXPECT_ANY_THROW(stats::weighted_ecdf(v, w));
}

TEST(WeightedEcdf, SupDistanceMatchesUnweightedKs) {
  RngStream rng(23, 2);
  std::vector<double> v(300);
  for (auto& x : v) x = rng.uniform();
  const std::vector<double> w(v.size(), 1.0);
  auto cdf = [](double t) { return std::clamp(t, 0.0, 1.0); };
  EXPECT_NEAR(stats::weighted_ecdf(v, w).sup_distance(cdf), stats::ks_statistic_unsorted(v, cdf), 1e-14);
}

TEST(MeanStderr, ConstantInputHasZeroError) {
  const std::vector<double> v(1000, 0.125);
  const auto est = stats::mc_mean_stderr(v);
  EXPECT_EQ(est.mean, 0.125);
  EXPECT_EQ(est.stderr_, 0.0);
}

TEST(MeanStderr, ConstantWeightedRatioHasZeroError) {
  RngStream rng(24, 0);
  std::vector<double> v(1000, 1.0), w(1000);
  for (auto& x : w) x = exponential_variate(rng);
  const auto est = stats::mc_mean_stderr(v, std::span<const double>(w));
  EXPECT_DOUBLE_EQ(est.mean, 1.0);
  EXPECT_EQ(est.stderr_, 0.0);
}

TEST(MeanStderr, UniformCoverageCalibration) {
  int covered = 0;
  const std::size_t n = 100000;
  for (int rep = 0; rep < 200; ++rep) {
    RngStream rng(25, static_cast<std::uint64_t>(rep));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform();
    const auto est = stats::mc_mean_stderr(v);
    covered += std::abs(est.mean - 0.5) <= 3.0 * est.stderr_;
  }
  EXPECT_GE(covered, 198);
}

TEST(MeanStderr, ErrorScalesAsInverseRootN) {
  // Quadrupling N halves the standard error. A single jackknife error carries
  // ~13% noise of its own, so compare means over replicates.
  auto mean_error = [](std::size_t n, int reps, std::uint64_t stream) {
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      RngStream rng(26, stream + static_cast<std::uint64_t>(r));
      std::vector<double> v(n);
      for (auto& x : v) x = exponential_variate(rng);
      sum += stats::mc_mean_stderr(v).stderr_;
    }
    return sum / reps;
  };
  const double ratio = mean_error(25000, 16, 0) / mean_error(100000, 16, 100);
  EXPECT_NEAR(ratio, 2.0, 0.4);
}

TEST(MeanStderr, FewValuesFallBackToSingleBatch) {
  const std::vector<double> v{1.0, 2.0, 3.0};
  const auto est = stats::mc_mean_stderr(v);
  EXPECT_TRUE(est.single_batch);
  EXPECT_DOUBLE_EQ(est.mean, 2.0);
}

TEST(MeanStderr, EmptyInputThrows) {
  const std::vector<double> v;
  EXPECT_ANY_THROW(stats::mc_mean_stderr(v));
}

TEST(EffectiveSampleSize, EqualWeightsGiveCount) {
  const std::vector<double> w(50, 3.0);
  EXPECT_DOUBLE_EQ(stats::effective_sample_size(w), 50.0);
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  stats::CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}

}  // namespace
}  // namespace lebesgue

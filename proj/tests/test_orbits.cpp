#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lebesgue/errors.hpp"
#include "lebesgue/orbits.hpp"
#include "lebesgue/quadrature.hpp"
#include "lebesgue/special.hpp"
#include "lebesgue/stats.hpp"

namespace lebesgue {
namespace {

// Independent 1-D oracle: F_2(lambda) = 2 int_0^inf exp(-2 lambda cosh x) dx.
double f2_by_quadrature(double lambda) {
  return 2.0 * quad::integrate_to_infinity([lambda](double x) { return std::exp(-2.0 * lambda * std::cosh(x)); }, 0.0,
                                           0.0, 1e-14)
                   .value;
}

StepFunctiond two_cell(double f0, double f1) {
  return StepFunctiond(MeshPartitiond::uniform(2), Eigen::Vector2d(f0, f1));
}

TEST(SphereUniform, NormEqualsRadius) {
  RngStream rng(61, 0);
  for (int n : {2, 3, 17, 200}) {
    for (double r : {0.5, 1.0, 14.1}) EXPECT_NEAR(sphere_uniform(rng, n, r).norm(), r, 1e-12 * r);
  }
}

TEST(SphereUniform, CoordinatesExchangeable) {
  RngStream rng(61, 1);
  const std::size_t n = 50000;
  std::vector<double> first(n), last(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = sphere_uniform(rng, 7, 1.0);
    first[i] = x[0];
    last[i] = x[6];
  }
  EXPECT_LT(stats::ks_two_sample(first, last), stats::ks_critical_two_sample(n, n, 0.05));
}

TEST(SphereUniform, HatBoxInThreeDimensions) {
  RngStream rng(61, 2);
  const std::size_t n = 100000;
  std::vector<double> z(n);
  for (auto& v : z) v = sphere_uniform(rng, 3, 1.0)[0];
  EXPECT_LT(stats::ks_statistic_unsorted(z, [](double t) { return std::clamp(0.5 * (t + 1.0), 0.0, 1.0); }),
            stats::ks_critical_one_sample(n, 0.05));
}

TEST(ProjectionDensity, ConstantForThreeDimensions) {
  for (double r : {0.5, 2.0}) {
    for (double x : {-0.4, 0.0, 0.3}) EXPECT_NEAR(mp_projection_density(x * r, 3, r), 0.5 / r, 1e-15);
  }
}

TEST(ProjectionDensity, NormalizedByQuadrature) {
  for (int n : {3, 5, 10, 50}) {
    const double r = 1.7;
    const double total = quad::integrate_tanh_sinh([&](double x, double, double) { return mp_projection_density(x, n, r); },
                                                   -r, r, 1e-14)
                             .value;
    EXPECT_NEAR(total, 1.0, 1e-10) << "n=" << n;
  }
}

TEST(ProjectionDensity, ZeroOutsideSupport) {
  EXPECT_EQ(mp_projection_density(1.5, 10, 1.0), 0.0);
  EXPECT_EQ(mp_projection_density(-1.5, 10, 1.0), 0.0);
}

TEST(ProjectionDensity, ExponentMatchesSphereMonteCarlo) {
  // n = 4: the (n-3)/2 law is the semicircle; the alternative (n-2)/2 exponent is not.
  RngStream rng(62, 0);
  const std::size_t n = 100000;
  std::vector<double> z(n);
  for (auto& v : z) v = sphere_uniform(rng, 4, 1.0)[0];
  std::sort(z.begin(), z.end());
  const auto exact = mp_projection_cdf_sorted(z, 4, 1.0);
  EXPECT_LT(stats::ks_statistic_tabulated(z, exact), stats::ks_critical_one_sample(n, 0.05));
  // Closed-form CDF of the density (3/4)(1 - x^2), the printed exponent's law.
  auto wrong = [](double x) { return 0.5 + 0.75 * x - 0.25 * x * x * x; };
  EXPECT_GT(stats::ks_statistic(z, wrong), 5.0 * stats::ks_critical_one_sample(n, 0.01));
}

TEST(ProjectionDensity, CdfAgreesWithSortedEvaluation) {
  const std::vector<double> xs{-0.9, -0.3, 0.0, 0.2, 0.95};
  const auto tab = mp_projection_cdf_sorted(xs, 9, 1.0);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(tab[i], mp_projection_cdf(xs[i], 9, 1.0), 1e-12);
}

TEST(ProjectionDensity, LargeDimensionCloseToNormal) { EXPECT_LT(mp_normal_distance(200), 0.01); }

TEST(ProjectionDensity, DistanceToNormalStrictlyDecreasing) {
  double prev = mp_normal_distance(5);
  EXPECT_GT(prev, 0.03);
  for (int n : {20, 80, 200}) {
    const double d = mp_normal_distance(n);
    EXPECT_LT(d, prev) << "n=" << n;
    prev = d;
  }
}

TEST(MaxwellPoincare, LargeDimensionPasses) {
  const auto rep = maxwell_poincare_experiment(RngStream(7, 0), 200, 1.0, 100000);
  EXPECT_LT(rep.ks_normal, 0.01);
  EXPECT_LT(rep.ks_exact, rep.critical_5pct);
}

TEST(MaxwellPoincare, SmallDimensionFarFromNormal) {
  const auto rep = maxwell_poincare_experiment(RngStream(7, 1), 5, 1.0, 100000);
  EXPECT_GT(rep.ks_normal, 0.03);
  EXPECT_LT(rep.ks_exact, rep.critical_5pct);
}

TEST(CartanOrbit, HyperplaneAndOrbitConstraints) {
  RngStream rng(63, 0);
  for (int n : {2, 3, 5, 12}) {
    for (int i = 0; i < 200; ++i) {
      const OrbitSample s = cartan_orbit_sample(rng, n, 1.0, 1.3);
      EXPECT_NEAR(s.log_coords.sum(), 0.0, 1e-9);
      const double log_prod = s.orbit_point().array().log().sum();
      EXPECT_NEAR(log_prod, -1.0 * n * n, 1e-6);
    }
  }
}

TEST(CartanOrbit, ImportanceEstimateOfTwoDimensionalIntegral) {
  const auto mc = mellin_barnes_Fn_mc(RngStream(63, 1), 1.0, 2, 100000, default_proposal_sigma(2));
  EXPECT_NEAR(mc.value, f2_by_quadrature(1.0), 3.0 * mc.error);
}

TEST(CartanOrbit, ProposalDensityIntegratesToOne) {
  // n = 2: the hyperplane coordinate is x_1 with x_2 = -x_1.
  const double sigma = 0.8;
  const double total = quad::integrate(
      [&](double x) { return std::exp(hyperplane_gaussian_log_density(Eigen::Vector2d(x, -x), sigma)); }, -20.0, 20.0).value;
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(RhoGeometricMean, ConstantFunction) {
  EXPECT_NEAR(rho_geometric_mean(StepFunctiond::constant(2.5), van_der_corput(37)), 2.5, 1e-14);
}

TEST(RhoGeometricMean, KoksmaBound) {
  // |mean of ln f over the points - integral of ln f| <= V(ln f) D*_n.
  const StepFunctiond f(MeshPartitiond(Eigen::Vector3d(0.2, 0.45, 0.35)), Eigen::Vector3d(0.5, 3.0, 1.7));
  const double variation = std::abs(std::log(3.0 / 0.5)) + std::abs(std::log(1.7 / 3.0));
  for (int n : {10, 100, 1000, 10000}) {
    const auto locs = van_der_corput(n);
    EXPECT_LE(std::abs(std::log(rho_geometric_mean(f, locs)) - f.mean_log_abs()), variation * locs.star_discrepancy())
        << "n=" << n;
  }
}

TEST(RhoGeometricMean, TwoCellWithinTwoOverN) {
  const StepFunctiond f = two_cell(1.0, 4.0);
  for (int n : {10, 101, 1000, 9999}) {
    EXPECT_LT(std::abs(std::log(rho_geometric_mean(f, van_der_corput(n))) - f.mean_log_abs()), 2.0 / n) << "n=" << n;
  }
}

TEST(RhoGeometricMean, TwoCellLimit) {
  EXPECT_NEAR(rho_geometric_mean(two_cell(1.0, 4.0), van_der_corput(10000)), 2.0, 1e-3);
}

TEST(VanDerCorput, LowDiscrepancy) {
  for (int n : {16, 100, 1000, 5000}) {
    EXPECT_LE(van_der_corput(n).star_discrepancy() * n, std::log2(n) + 3.0) << "n=" << n;
  }
}

TEST(OrbitLaplace, ZeroDimensionalOrbit) {
  const auto est = laplace_orbit_Dn(RngStream(64, 0), StepFunctiond::constant(3.0), 1, 1.0, 10, 1.0);
  EXPECT_DOUBLE_EQ(est.estimate, std::exp(-3.0 * std::exp(-1.0)));
}

TEST(OrbitLaplace, TwoDimensionalMatchesQuadrature) {
  const auto est = laplace_orbit_Dn(RngStream(64, 1), StepFunctiond::constant(1.0), 2, 1.0, 100000,
                                    default_proposal_sigma(2) + 1.0);
  const double oracle = mellin_barnes_Fn(std::exp(-2.0), 2).value;
  EXPECT_NEAR(oracle, f2_by_quadrature(std::exp(-2.0)), 1e-9);
  EXPECT_NEAR(est.estimate, oracle, 3.0 * est.stderr_);
}

TEST(OrbitLaplace, EqualRhoGivesEqualTransforms) {
  // Same locations; (1, 4) and (2, 2) have the same geometric mean over van der Corput points at n = 4.
  const auto locs = van_der_corput(4);
  const StepFunctiond f = two_cell(1.0, 4.0), g = two_cell(2.0, 2.0);
  ASSERT_NEAR(rho_geometric_mean(f, locs), rho_geometric_mean(g, locs), 1e-14);
  const auto a = laplace_orbit_Dn(RngStream(64, 2), f, locs, 1.0, 100000, 2.5);
  const auto b = laplace_orbit_Dn(RngStream(64, 3), g, locs, 1.0, 100000, 2.5);
  EXPECT_NEAR(a.estimate, b.estimate, 3.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST(MellinBarnes, OneDimensionalIsExponential) {
  for (double lambda : {0.1, 1.0, 3.0}) EXPECT_EQ(mellin_barnes_Fn(lambda, 1).value, std::exp(-lambda));
}

TEST(MellinBarnes, TwoDimensionalBesselValue) {
  const double lattice = mellin_barnes_Fn(1.0, 2).value;
  const double bessel = 2.0 * bessel_k0_series(2.0);
  EXPECT_NEAR(bessel, f2_by_quadrature(1.0), 1e-12);
  EXPECT_NEAR(lattice, bessel, 1e-6);
  EXPECT_NEAR(lattice, 0.2277877, 1e-6);
}

TEST(MellinBarnes, DecreasingInLambda) {
  for (int n = 2; n <= 4; ++n) EXPECT_LT(mellin_barnes_Fn(2.0, n).value, mellin_barnes_Fn(1.0, n).value);
}

TEST(MellinBarnes, ThreeDimensionalAgainstNestedQuadrature) {
  // F_3(lambda) = int int exp(-lambda (e^a + e^b + e^{-a-b})) da db.
  const double lambda = 1.0;
  auto inner = [&](double a) {
    return quad::integrate([&](double b) { return std::exp(-lambda * (std::exp(a) + std::exp(b) + std::exp(-a - b))); },
                           -30.0, 6.0, 1e-15, 1e-13)
        .value;
  };
  const double oracle = quad::integrate(inner, -30.0, 6.0, 1e-14, 1e-12).value;
  EXPECT_NEAR(mellin_barnes_Fn(lambda, 3).value, oracle, 1e-9);
}

TEST(MellinBarnes, MonteCarloAgreesWithQuadrature) {
  for (int n = 2; n <= 4; ++n) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      const RngStream rng(65, static_cast<std::uint64_t>(n * 10 + lambda * 2));
      const auto mc = mellin_barnes_Fn_mc(rng, lambda, n, 100000, default_proposal_sigma(n));
      EXPECT_NEAR(mc.value, mellin_barnes_Fn(lambda, n).value, 3.0 * mc.error) << "n=" << n << " lambda=" << lambda;
    }
  }
}

TEST(MellinBarnesOde, SignFlippedResidualVanishesForOneDimension) {
  const auto c = mellin_barnes_ode_convergence(1, 1.0, {1e-2, 5e-3, 2.5e-3});
  for (const auto& r : c.residuals) EXPECT_LT(r.residual_minus, 1e-4);
  EXPECT_TRUE(c.residuals.back().minus_is_smaller);
  EXPECT_NEAR(c.order_minus, 2.0, 0.2);
}

TEST(MellinBarnesOde, LogEulerFormConvergesForTwoDimensions) {
  const auto c = mellin_barnes_ode_convergence(2, 1.0, {1e-2, 5e-3, 2.5e-3});
  EXPECT_NEAR(c.order_log_euler, 2.0, 0.2);
}

TEST(MellinBarnesOde, RejectsUnsupportedDimension) {
  EXPECT_THROW(mellin_barnes_ode_residual(5, 1.0, 1e-2), ParameterError);
}

TEST(ZagierProbe, FirstEntryAndPositivity) {
  const auto rows = zagier_limit_probe(RngStream(66, 0), 1.0, 8, 4000, 3);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_DOUBLE_EQ(rows[0].value, std::exp(-1.0));
  for (const auto& r : rows) EXPECT_GT(r.value, 0.0);
  EXPECT_GT(rows[7].stderr_, 0.0);
  EXPECT_GT(rows[7].difference_stderr, 0.0);
}

TEST(WindowVolume, NondecreasingAndEmptyBelowBound) {
  const std::vector<double> grid{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  const auto rows = lebesgue_window_volume(RngStream(67, 0), 3, 1.0, grid, 20000, 2.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].volume, rows[i - 1].volume);
  // sum e^{x_k} >= n on H_n, so s e^{theta n} < n leaves nothing.
  EXPECT_EQ(rows[0].volume, 0.0);
}

TEST(WindowVolume, TwoDimensionalMatchesSetLength) {
  const std::vector<double> grid{0.5, 1.0, 3.0};
  const auto rows = lebesgue_window_volume(RngStream(67, 1), 2, 1.0, grid, 100000, 3.0);
  for (const auto& row : rows) {
    // {x : 2 cosh x <= s e^2} has length 2 arccosh(s e^2 / 2).
    const double exact = 2.0 * std::acosh(row.s * std::exp(2.0) / 2.0);
    EXPECT_NEAR(row.volume, exact, 3.0 * row.stderr_) << "s=" << row.s;
  }
}

}  // namespace
}  // namespace lebesgue

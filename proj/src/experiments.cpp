#include "lebesgue/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "lebesgue/errors.hpp"
#include "lebesgue/laplace.hpp"
#include "lebesgue/measures.hpp"
#include "lebesgue/orbits.hpp"
#include "lebesgue/parallel.hpp"
#include "lebesgue/quadrature.hpp"
#include "lebesgue/rng.hpp"
#include "lebesgue/special.hpp"
#include "lebesgue/stats.hpp"
#include "lebesgue/universality.hpp"

namespace lebesgue {

namespace {

constexpr double kNoLimit = std::numeric_limits<double>::max();

struct CriterionInfo {
  const char* title;
  const char* experiment;
};

constexpr CriterionInfo kCriteria[kCriterionCount] = {
    {"weak-density Laplace identity", "weak-density"},
    {"refinement consistency", "weak-density"},
    {"weight cancellation at f = 1", "gamma-weight"},
    {"Laplace estimator at f = 2", "gamma-weight"},
    {"multiplier invariance", "invariance"},
    {"gamma thinning", "thinning"},
    {"PD cross-construction", "pd-cross"},
    {"Maxwell-Poincare projection", "maxwell-poincare"},
    {"Mellin-Barnes values", "mellin-barnes"},
    {"equal-rho invariance of D_n", "orbit-laplace"},
    {"Ewens cycles", "cycles"},
    {"prime factor profiles", "primes"},
    {"Dickman function", "dickman"},
    {"signed extension", "signed"},
    {"Mellin-Barnes ODE residual", "ode-residual"},
};

RngStream stream(const RunContext& c, int criterion, int sub) {
  return RngStream(c.seed, static_cast<std::uint64_t>(criterion) * 1000 + static_cast<std::uint64_t>(sub));
}

std::size_t pick(const RunContext& c, std::size_t full, std::size_t quick) {
  if (c.samples) return *c.samples;
  return c.quick ? quick : full;
}

CheckRow tag(CheckRow row, int n, double theta, std::string param = {}) {
  row.n = n;
  row.theta = theta;
  row.param = std::move(param);
  return row;
}

CheckRow diagnostic(std::string name, double estimate, double stderr_ = 0.0) {
  return make_check(std::move(name), estimate, stderr_, 0.0, kNoLimit, Rule::le, false);
}

std::string param(const char* key, double value) { return std::string(key) + "=" + format_number(value); }

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

double uniform_in(RngStream& r, double lo, double hi) { return lo + (hi - lo) * r.uniform(); }

int uniform_int(RngStream& r, int lo, int hi) {
  return std::min(hi, lo + static_cast<int>(r.uniform() * (hi - lo + 1)));
}

MeshPartitiond random_partition(RngStream& r, int cells) {
  Eigen::VectorXd m(cells);
  for (int k = 0; k < cells; ++k) m[k] = uniform_in(r, 0.2, 1.0);
  m /= m.sum();
  return MeshPartitiond(m);
}

StepFunctiond random_step(RngStream& r, int cells, double lo, double hi) {
  MeshPartitiond p = random_partition(r, cells);
  Eigen::VectorXd v(cells);
  for (int k = 0; k < cells; ++k) v[k] = uniform_in(r, lo, hi);
  return StepFunctiond(std::move(p), std::move(v));
}

double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }

WeightedEnsemble ensemble(const RunContext& c, const RngStream& rng, double theta, std::size_t n) {
  EnsembleOptions opt;
  opt.threads = c.threads;
  return build_weighted_ensemble(rng, theta, n, c.window.value_or(30.0), opt);
}

WeightedEnsemble prefix(const WeightedEnsemble& e, std::size_t n) {
  WeightedEnsemble out;
  out.window = e.window;
  out.theta = e.theta;
  out.seed = e.seed;
  out.samples.assign(e.samples.begin(), e.samples.begin() + static_cast<std::ptrdiff_t>(n));
  out.log_weights.assign(e.log_weights.begin(), e.log_weights.begin() + static_cast<std::ptrdiff_t>(n));
  out.rejected.assign(e.rejected.begin(), e.rejected.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

// 1. Quadrature of the finite-dimensional Laplace integral against the product formula.
std::vector<CheckRow> criterion_weak_density(const RunContext& c) {
  const double tol = c.tolerances.at("quadrature_abs");
  const std::vector<double> thetas = c.theta ? std::vector<double>{*c.theta} : std::vector<double>{0.5, 1.0, 2.0};
  std::vector<StepFunctiond> fs;
  if (c.f) {
    fs.push_back(*c.f);
  } else {
    RngStream r = stream(c, 1, 0);
    fs.emplace_back(MeshPartitiond(vec({0.5, 0.5})), vec({1.0, 2.0}));
    for (int cells = 1; cells <= 4; ++cells) {
      for (int rep = 0; rep < 2; ++rep) fs.push_back(random_step(r, cells, 0.3, 3.0));
    }
  }
  std::vector<CheckRow> rows;
  for (double theta : thetas) {
    for (const auto& f : fs) {
      const QuadratureValue q = finite_dim_laplace_quadrature(f, theta);
      rows.push_back(tag(make_check("laplace_quadrature", q.value, q.error_estimate, phi_theta(f, theta), tol,
                                    Rule::abs_diff_le),
                         static_cast<int>(f.size()), theta, step_function_hash(f)));
    }
  }
  return rows;
}

// 2. Density of a merged pair of cells against the Gamma(theta (m_i + m_j)) density.
std::vector<CheckRow> criterion_refinement(const RunContext& c) {
  const double tol = c.tolerances.at("merge_abs");
  const std::vector<double> grid{0.5, 1.0, 2.0};
  struct Case {
    MeshPartitiond partition;
    double theta;
    Eigen::Index i, j;
  };
  std::vector<Case> cases;
  cases.push_back({MeshPartitiond(vec({0.25, 0.75})), 2.0, 0, 1});
  cases.push_back({MeshPartitiond(vec({0.5, 0.5})), 1.0, 0, 1});
  RngStream r = stream(c, 2, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const int cells = uniform_int(r, 2, 4);
    MeshPartitiond p = random_partition(r, cells);
    const double theta = c.theta.value_or(uniform_in(r, 0.5, 2.5));
    const int i = uniform_int(r, 0, cells - 2);
    const int j = uniform_int(r, i + 1, cells - 1);
    cases.push_back({std::move(p), theta, i, j});
  }
  std::vector<CheckRow> rows;
  for (const auto& cs : cases) {
    for (const MergeRow& m : refinement_merge_check(cs.partition, cs.theta, cs.i, cs.j, grid)) {
      std::ostringstream os;
      os << "cells=" << cs.i << "+" << cs.j << ";m=" << format_number(cs.partition.mass(cs.i)) << "+"
         << format_number(cs.partition.mass(cs.j)) << ";s=" << format_number(m.s);
      rows.push_back(tag(make_check("merged_density", m.quadrature, 0.0, m.closed_form, tol, Rule::abs_diff_le),
                         static_cast<int>(cs.partition.size()), cs.theta, os.str()));
    }
  }
  return rows;
}

// 3. exp(total mass) against exp(-<1, xi>) cancels sample by sample.
std::vector<CheckRow> criterion_weight_cancellation(const RunContext& c) {
  const double theta = c.theta.value_or(1.0);
  const std::size_t n = pick(c, 100000, 10000);
  const WeightedEnsemble ens = ensemble(c, stream(c, 3, 0), theta, n);
  std::vector<CheckRow> rows;
  const std::vector<StepFunctiond> ones{StepFunctiond::constant(1.0),
                                        StepFunctiond(MeshPartitiond(vec({0.2, 0.3, 0.5})), vec({1.0, 1.0, 1.0}))};
  for (const auto& f : ones) {
    const LaplaceEstimate e = empirical_laplace(ens, f);
    const std::string p = step_function_hash(f);
    rows.push_back(tag(make_check("unit_laplace_estimate", e.estimate, e.stderr_, 1.0, 0.0, Rule::abs_diff_le),
                       static_cast<int>(n), theta, p));
    rows.push_back(tag(make_check("unit_laplace_stderr", e.stderr_, 0.0, 0.0, 0.0, Rule::le), static_cast<int>(n),
                       theta, p));
  }
  rows.push_back(tag(diagnostic("truncation_warnings", static_cast<double>(ens.truncation_warnings)),
                     static_cast<int>(n), theta));
  return rows;
}

// 4. Importance estimate of Phi_theta(2) = 2^-theta.
std::vector<CheckRow> criterion_laplace_estimator(const RunContext& c) {
  const double theta = c.theta.value_or(1.0);
  const std::size_t n = pick(c, 100000, 10000);
  const StepFunctiond f = c.f.value_or(StepFunctiond::constant(2.0));
  if (!f.positive()) throw ParameterError("gamma-weight: f must be positive");
  const WeightedEnsemble ens = ensemble(c, stream(c, 4, 0), theta, n);
  const LaplaceEstimate e = empirical_laplace(ens, f);
  const double oracle = std::exp(-theta * f.mean_log_abs());
  const std::string p = step_function_hash(f);
  std::vector<CheckRow> rows;
  rows.push_back(tag(make_check("laplace_estimate", e.estimate, e.stderr_, oracle,
                                c.tolerances.at("se_multiplier"), Rule::within_se),
                     static_cast<int>(n), theta, p));
  rows.push_back(tag(make_check("laplace_stderr", e.stderr_, 0.0, 0.0, c.tolerances.at("laplace_stderr_max"), Rule::le),
                     static_cast<int>(n), theta, p));
  // Standard error should shrink like 1 / sqrt(N).
  for (std::size_t m = 1000; 10 * m <= n; m *= 10) {
    const double small = empirical_laplace(prefix(ens, m), f).stderr_;
    const double large = empirical_laplace(prefix(ens, 10 * m), f).stderr_;
    CheckRow row = make_check("stderr_ratio", small / large, 0.0, std::sqrt(10.0),
                              c.tolerances.at("stderr_scaling_rel") * std::sqrt(10.0), Rule::abs_diff_le, false);
    rows.push_back(tag(row, static_cast<int>(m), theta, p));
  }
  return rows;
}

// 5. Exact multiplier identity and its Monte Carlo shadow.
std::vector<CheckRow> criterion_invariance(const RunContext& c) {
  std::vector<CheckRow> rows;
  RngStream r = stream(c, 5, 0);
  double worst = 0.0;
  const int triples = 1000;
  for (int t = 0; t < triples; ++t) {
    const int cells = uniform_int(r, 1, 6);
    const StepFunctiond f = random_step(r, cells, 0.1, 10.0);
    Eigen::VectorXd a(cells);
    for (int k = 0; k < cells; ++k) a[k] = uniform_in(r, 0.1, 10.0);
    const double theta = uniform_in(r, 0.1, 5.0);
    const auto rep = multiplier_invariance_check(f, StepFunctiond(f.partition(), a), theta);
    worst = std::max(worst, rep.relative_error);
  }
  rows.push_back(tag(make_check("multiplier_identity_max_rel", worst, 0.0, 0.0, c.tolerances.at("invariance_rel"),
                                Rule::le),
                     triples, 0.0));

  const double theta = c.theta.value_or(1.0);
  const std::size_t n = pick(c, 100000, 10000);
  const StepFunctiond f(MeshPartitiond(vec({0.5, 0.5})), vec({1.0, 2.0}));
  const StepFunctiond a(f.partition(), vec({2.0, 0.5}));  // zero log-mean
  const WeightedEnsemble e1 = ensemble(c, stream(c, 5, 1), theta, n);
  const WeightedEnsemble e2 = ensemble(c, stream(c, 5, 2), theta, n);
  const LaplaceEstimate pushed =
      empirical_laplace_pushed(e1, f, [&](const DiscreteMeasure& m) { return multiplier_action(m, a); });
  const LaplaceEstimate plain = empirical_laplace(e2, f);
  const std::string p = step_function_hash(f) + ";a=" + step_function_hash(a);
  rows.push_back(tag(make_check("ensemble_invariance_difference", pushed.estimate - plain.estimate,
                                combined_se(pushed.stderr_, plain.stderr_), 0.0, c.tolerances.at("se_multiplier"),
                                Rule::within_se),
                     static_cast<int>(n), theta, p));
  const double oracle = phi_theta(f, theta);
  rows.push_back(tag(make_check("pushed_vs_phi", pushed.estimate, pushed.stderr_, oracle,
                                c.tolerances.at("se_multiplier"), Rule::within_se, false),
                     static_cast<int>(n), theta, p));
  rows.push_back(tag(make_check("plain_vs_phi", plain.estimate, plain.stderr_, oracle, c.tolerances.at("se_multiplier"),
                                Rule::within_se, false),
                     static_cast<int>(n), theta, p));
  return rows;
}

// 6. Class sums of a thinned gamma subordinator.
std::vector<CheckRow> criterion_thinning(const RunContext& c) {
  const double theta = c.theta.value_or(1.0);
  const int classes = c.n.value_or(2);
  const std::size_t n = pick(c, 100000, 10000);
  const double window = c.window.value_or(2.0);
  const ThinningReport rep = thinning_partition_test(stream(c, 6, 0), theta, classes, n, window, c.threads);
  const double crit = stats::ks_critical_one_sample(n, c.tolerances.at("ks_alpha"));
  const double corr_bound = c.tolerances.at("correlation_multiplier") / std::sqrt(static_cast<double>(n));
  std::vector<CheckRow> rows;
  for (int k = 0; k < classes; ++k) {
    rows.push_back(tag(make_check("class_ks_gamma", rep.ks_per_class[static_cast<std::size_t>(k)], 0.0, 0.0, crit,
                                  Rule::le),
                       classes, theta, "class=" + std::to_string(k)));
  }
  if (classes > 1) {
    rows.push_back(tag(make_check("max_abs_class_correlation", rep.max_abs_correlation, 0.0, 0.0, corr_bound, Rule::le),
                       classes, theta));
  }
  rows.push_back(tag(make_check("weighted_joint_ecdf_sup", rep.weighted_sup_distance, 0.0, 0.0,
                                c.tolerances.at("thinning_weighted_sup"), Rule::le),
                     classes, theta, param("M", window)));
  rows.push_back(tag(diagnostic("window_accepted", static_cast<double>(rep.accepted)), classes, theta));
  rows.push_back(tag(diagnostic("window_effective_sample_size", rep.effective_sample_size), classes, theta));
  return rows;
}

// 7. Largest part: sorted stick breaking vs normalized subordinator jumps.
std::vector<CheckRow> criterion_pd_cross(const RunContext& c) {
  const std::vector<double> thetas = c.theta ? std::vector<double>{*c.theta} : std::vector<double>{0.5, 1.0, 2.0};
  const std::size_t n = pick(c, 100000, 10000);
  std::vector<CheckRow> rows;
  int sub = 0;
  for (double theta : thetas) {
    const auto gem = pd_largest_parts(stream(c, 7, sub++), theta, n, c.threads);
    const auto jumps = jump_largest_parts(stream(c, 7, sub++), theta, n, c.threads);
    const double d = stats::ks_two_sample(gem, jumps);
    const double crit = stats::ks_critical_two_sample(n, n, c.tolerances.at("ks_alpha"));
    rows.push_back(tag(make_check("largest_part_ks_two_sample", d, 0.0, 0.0, crit, Rule::le), static_cast<int>(n), theta));
    if (c.dump) {
      c.dump->header = {"theta", "sample", "gem_largest", "jump_largest"};
      for (std::size_t i = 0; i < n; ++i) {
        c.dump->rows.push_back({format_number(theta), std::to_string(i), format_number(gem[i]), format_number(jumps[i])});
      }
    }
  }
  return rows;
}

// 8. First coordinate of a uniform point on the sphere of radius sqrt(n).
std::vector<CheckRow> criterion_maxwell_poincare(const RunContext& c) {
  const int n = c.n.value_or(200);
  const std::size_t samples = pick(c, 100000, 10000);
  const MaxwellPoincareReport rep = maxwell_poincare_experiment(stream(c, 8, 0), n, 1.0, samples, c.threads);
  std::vector<CheckRow> rows;
  rows.push_back(tag(make_check("first_coordinate_ks_normal", rep.ks_normal, 0.0, 0.0, c.tolerances.at("mp_ks_max"),
                                Rule::le),
                     n, 0.0, "c=1"));
  rows.push_back(tag(make_check("first_coordinate_ks_projection_law", rep.ks_exact, 0.0, 0.0, rep.critical_5pct,
                                Rule::le, false),
                     n, 0.0, "c=1"));
  const std::vector<int> ladder{5, 20, 80, 200};
  double previous = mp_normal_distance(ladder.front());
  rows.push_back(tag(diagnostic("quadrature_distance", previous), ladder.front(), 0.0));
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    const double d = mp_normal_distance(ladder[k]);
    rows.push_back(tag(diagnostic("quadrature_distance", d), ladder[k], 0.0));
    // Strict decrease: the drop must be positive.
    rows.push_back(tag(make_check("quadrature_distance_drop", previous - d, 0.0, 0.0,
                                  std::numeric_limits<double>::min(), Rule::ge),
                       ladder[k], 0.0, "from=" + std::to_string(ladder[k - 1])));
    previous = d;
  }
  return rows;
}

// 9. F_1 closed form, F_2 against two Bessel oracles, Monte Carlo against quadrature.
std::vector<CheckRow> criterion_mellin_barnes(const RunContext& c) {
  std::vector<CheckRow> rows;
  const std::vector<double> lambdas =
      c.lambda ? std::vector<double>{*c.lambda} : std::vector<double>{0.5, 1.0, 2.0};
  for (double lambda : lambdas) {
    rows.push_back(tag(make_check("F1_closed_form", mellin_barnes_Fn(lambda, 1).value, 0.0, std::exp(-lambda), 0.0,
                                  Rule::abs_diff_le),
                       1, 0.0, param("lambda", lambda)));
  }
  const double tol = c.tolerances.at("f2_abs");
  const double f2 = mellin_barnes_Fn(1.0, 2).value;
  rows.push_back(tag(make_check("F2_vs_bessel_series", f2, 0.0, 2.0 * bessel_k0_series(2.0), tol, Rule::abs_diff_le), 2,
                     0.0, "lambda=1"));
  const double k0_integral =
      quad::integrate_to_infinity([](double x) { return 2.0 * std::exp(-2.0 * std::cosh(x)); }, 0.0, 1e-14, 1e-14).value;
  rows.push_back(tag(make_check("F2_vs_cosh_integral", f2, 0.0, k0_integral, tol, Rule::abs_diff_le), 2, 0.0,
                     "lambda=1"));
  rows.push_back(tag(make_check("F2_vs_tabulated", f2, 0.0, 0.2277877, tol, Rule::abs_diff_le), 2, 0.0, "lambda=1"));

  const std::size_t samples = pick(c, 100000, 10000);
  const std::vector<int> dims = c.n ? std::vector<int>{*c.n} : std::vector<int>{2, 3, 4};
  int sub = 0;
  for (int n : dims) {
    for (double lambda : lambdas) {
      const MellinBarnesValue q = mellin_barnes_Fn(lambda, n);
      const MellinBarnesValue mc =
          mellin_barnes_Fn_mc(stream(c, 9, sub++), lambda, n, samples, default_proposal_sigma(n), c.threads);
      rows.push_back(tag(make_check("Fn_mc_vs_quadrature", mc.value, mc.error, q.value, c.tolerances.at("se_multiplier"),
                                    Rule::within_se),
                         n, 0.0, param("lambda", lambda)));
    }
  }
  return rows;
}

// 10. D_n depends on f only through the geometric mean over the locations.
std::vector<CheckRow> criterion_orbit_laplace(const RunContext& c) {
  const int n = c.n.value_or(3);
  const double theta = c.theta.value_or(1.0);
  const std::size_t samples = pick(c, 100000, 5000);
  const int pairs = 50;
  const UniformlySpreadLocations locs = van_der_corput(n);
  const double sigma = default_proposal_sigma(n);
  RngStream r = stream(c, 10, 0);
  const double k_se = c.tolerances.at("se_multiplier");
  std::vector<CheckRow> rows;
  int within = 0;
  for (int p = 0; p < pairs; ++p) {
    const StepFunctiond f = random_step(r, uniform_int(r, 1, 4), 0.5, 3.0);
    const StepFunctiond g0 = random_step(r, uniform_int(r, 1, 4), 0.5, 3.0);
    const StepFunctiond g = g0 * (rho_geometric_mean(f, locs) / rho_geometric_mean(g0, locs));
    const OrbitEstimate ef = laplace_orbit_Dn(stream(c, 10, 2 * p + 1), f, locs, theta, samples, sigma, c.threads);
    const OrbitEstimate eg = laplace_orbit_Dn(stream(c, 10, 2 * p + 2), g, locs, theta, samples, sigma, c.threads);
    CheckRow row = make_check("matched_rho_pair", ef.estimate - eg.estimate, combined_se(ef.stderr_, eg.stderr_), 0.0,
                              k_se, Rule::within_se, false);
    if (row.pass) ++within;
    rows.push_back(tag(row, n, theta, "pair=" + std::to_string(p)));
    if (p < 3 && n <= kMellinBarnesMaxQuadratureN) {
      const double lambda = rho_geometric_mean(f, locs) * std::exp(-theta * n);
      rows.push_back(tag(make_check("Dn_vs_Fn_quadrature", ef.estimate, ef.stderr_,
                                    mellin_barnes_Fn(lambda, n).value, k_se, Rule::within_se, false),
                         n, theta, param("lambda", lambda)));
    }
  }
  const double needed = std::ceil(c.tolerances.at("orbit_pairs_fraction") * pairs - 1e-9);
  rows.push_back(tag(make_check("matched_pairs_within_3se", within, 0.0, pairs, needed, Rule::ge), n, theta,
                     "pairs=" + std::to_string(pairs)));
  return rows;
}

// Exact Ewens mean cycle count by enumerating S_n, weights theta^K.
double brute_force_mean_cycles(int n, double theta) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double num = 0.0, den = 0.0;
  do {
    std::vector<char> seen(perm.size(), 0);
    int cycles = 0;
    for (std::size_t s = 0; s < perm.size(); ++s) {
      if (seen[s]) continue;
      ++cycles;
      for (std::size_t t = s; !seen[t]; t = static_cast<std::size_t>(perm[t])) seen[t] = 1;
    }
    const double w = std::pow(theta, cycles);
    num += w * cycles;
    den += w;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return num / den;
}

double golomb_dickman_constant() {
  return quad::integrate_to_infinity([](double x) { return x <= 0.0 ? 0.0 : std::exp(-x - exp_integral_E1(x)); },
                                     0.0, 1e-13, 1e-13)
      .value;
}

// 11. Cycle statistics of Ewens permutations.
std::vector<CheckRow> criterion_cycles(const RunContext& c) {
  const double theta = c.theta.value_or(1.0);
  const double k_se = c.tolerances.at("se_multiplier");
  std::vector<CheckRow> rows;

  const double brute = brute_force_mean_cycles(4, theta);
  double harmonic = 0.0;
  for (int i = 0; i < 4; ++i) harmonic += theta / (theta + i);
  rows.push_back(tag(make_check("enumerated_mean_cycles", brute, 0.0, harmonic, 1e-12, Rule::abs_diff_le), 4, theta));

  const std::size_t small_draws = pick(c, 100000, 10000);
  std::vector<double> counts(small_draws);
  const RngStream s4 = stream(c, 11, 0);
  parallel_for(small_draws, c.threads, [&](std::size_t i) {
    RngStream local = s4.split(i);
    counts[i] = static_cast<double>(ewens_cycles(local, 4, theta).cycle_lengths.size());
  });
  const stats::MeanEstimate mc = stats::mc_mean_stderr(counts);
  rows.push_back(tag(make_check("mc_mean_cycles", mc.mean, mc.stderr_, brute, k_se, Rule::within_se), 4, theta));

  const int n = c.n.value_or(10000);
  const std::size_t draws = c.quick ? 1000 : 10000;
  const auto largest = cycle_largest_parts(stream(c, 11, 1), n, theta, draws, c.threads);
  const stats::MeanEstimate lc = stats::mc_mean_stderr(largest);
  const stats::MeanEstimate sb = largest_part_mean(stream(c, 11, 2), theta, pick(c, 100000, 10000), c.threads);
  rows.push_back(tag(make_check("largest_cycle_vs_stick_breaking", lc.mean - sb.mean, combined_se(lc.stderr_, sb.stderr_),
                                0.0, k_se, Rule::within_se),
                     n, theta));
  if (theta == 1.0) {
    const double gd = golomb_dickman_constant();
    rows.push_back(tag(make_check("largest_cycle_vs_golomb_dickman", lc.mean, lc.stderr_, gd, k_se, Rule::within_se), n,
                       theta));
    rows.push_back(tag(make_check("golomb_dickman_vs_tabulated", gd, 0.0, 0.6243, 5e-5, Rule::abs_diff_le), 0, theta));
  }
  if (c.dump) {
    c.dump->header = {"sample", "n", "cycle_lengths"};
    const RngStream ds = stream(c, 11, 1);
    for (std::size_t i = 0; i < draws; ++i) {
      RngStream local = ds.split(i);
      const CycleProfile prof = ewens_cycles(local, n, theta);
      std::string joined;
      for (std::size_t k = 0; k < prof.cycle_lengths.size(); ++k) {
        joined += (k ? ";" : "") + std::to_string(prof.cycle_lengths[k]);
      }
      c.dump->rows.push_back({std::to_string(i), std::to_string(n), joined});
    }
  }
  return rows;
}

// 12. Largest prime factor of a uniform integer against the Dickman law.
std::vector<CheckRow> criterion_primes(const RunContext& c) {
  const std::uint64_t n_max = c.n ? static_cast<std::uint64_t>(*c.n) : (c.quick ? 1000000ull : 10000000ull);
  const std::size_t samples = pick(c, 100000, 10000);
  const PrimeExperimentReport rep =
      prime_universality_experiment(stream(c, 12, 0), n_max, samples, true, c.threads);
  const int nm = static_cast<int>(std::min<std::uint64_t>(n_max, std::numeric_limits<int>::max()));
  std::vector<CheckRow> rows;
  rows.push_back(tag(make_check("largest_component_sup_distance", rep.sup_distance, 0.0, 0.0,
                                c.tolerances.at("prime_sup_max"), Rule::le),
                     nm, 1.0));
  rows.push_back(tag(make_check("largest_component_above_half", rep.fraction_above_half, 0.0, std::log(2.0),
                                c.tolerances.at("prime_half_abs"), Rule::abs_diff_le),
                     nm, 1.0));
  std::size_t primes = 0;
  for (const auto& p : rep.profiles) primes += p.primes.size() == 1 ? 1 : 0;
  // Primes put an atom at component 1, where rho(1) = 1: a floor on the sup distance.
  rows.push_back(tag(diagnostic("prime_atom_fraction", static_cast<double>(primes) / static_cast<double>(samples)), nm,
                     1.0));
  if (c.dump) {
    c.dump->header = {"sample", "n", "primes"};
    for (std::size_t i = 0; i < rep.profiles.size(); ++i) {
      std::string joined;
      for (std::size_t k = 0; k < rep.profiles[i].primes.size(); ++k) {
        joined += (k ? ";" : "") + std::to_string(rep.profiles[i].primes[k]);
      }
      c.dump->rows.push_back({std::to_string(i), std::to_string(rep.profiles[i].n), joined});
    }
  }
  return rows;
}

// 13. Dickman function values from two integrators.
std::vector<CheckRow> criterion_dickman(const RunContext& c) {
  std::vector<CheckRow> rows;
  rows.push_back(tag(make_check("rho_2_closed_form", dickman_rho(2.0), 0.0, 1.0 - std::log(2.0),
                                c.tolerances.at("dickman_abs"), Rule::abs_diff_le),
                     0, 0.0, "u=2"));
  rows.push_back(tag(make_check("rho_3_two_integrators", dickman_rho(3.0), 0.0, dickman_rho_quadrature(3.0),
                                c.tolerances.at("dickman_agree"), Rule::abs_diff_le),
                     0, 0.0, "u=3"));
  for (double u : {1.5, 2.5, 3.5}) {
    rows.push_back(tag(make_check("rho_two_integrators", dickman_rho(u), 0.0, dickman_rho_quadrature(u),
                                  c.tolerances.at("dickman_agree"), Rule::abs_diff_le, false),
                       0, 0.0, param("u", u)));
  }
  return rows;
}

// 14. Sign patterns: the signed functional sees only |f|.
std::vector<CheckRow> criterion_signed(const RunContext& c) {
  std::vector<CheckRow> rows;
  RngStream r = stream(c, 14, 0);
  int mismatches = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const StepFunctiond f = random_step(r, uniform_int(r, 1, 6), 0.1, 10.0);
    const double theta = uniform_in(r, 0.1, 5.0);
    const StepFunctiond flipped = f.map([&](double v) { return random_sign(r) * v; });
    if (phi_theta_signed(flipped, theta) != phi_theta_signed(f, theta)) ++mismatches;
  }
  rows.push_back(tag(make_check("sign_pattern_mismatches", mismatches, 0.0, 0.0, 0.0, Rule::le), trials, 0.0));

  const double theta = c.theta.value_or(1.0);
  const std::size_t n = pick(c, 100000, 10000);
  const StepFunctiond f =
      c.f.value_or(StepFunctiond(MeshPartitiond(vec({0.3, 0.3, 0.4})), vec({-2.0, 1.5, -1.0})));
  if (!f.nonvanishing()) throw ParameterError("signed: f must not vanish");
  WeightedEnsemble ens = ensemble(c, stream(c, 14, 1), theta, n);
  const RngStream signs = stream(c, 14, 2);
  parallel_for(ens.size(), c.threads, [&](std::size_t i) {
    RngStream local = signs.split(i);
    ens.samples[i] = sign_symmetrize(local, ens.samples[i]);
  });
  const LaplaceEstimate e = empirical_laplace_signed(ens, f);
  rows.push_back(tag(make_check("signed_laplace_vs_phi_abs", e.estimate, e.stderr_, phi_theta(f.abs(), theta),
                                c.tolerances.at("se_multiplier"), Rule::within_se),
                     static_cast<int>(n), theta, step_function_hash(f)));
  return rows;
}

// 15. Residuals of the printed ODE and its sign flip.
std::vector<CheckRow> criterion_ode(const RunContext& c) {
  std::vector<CheckRow> rows;
  const double lambda = c.lambda.value_or(1.0);
  // n = 1: F = e^{-lambda}, F' = -e^{-lambda}.
  const double f1 = mellin_barnes_Fn(lambda, 1).value;
  const double df1 = -std::exp(-lambda);
  rows.push_back(tag(make_check("n1_residual_sign_flipped", std::abs(df1 + f1), 0.0, 0.0, 0.0, Rule::le), 1, 0.0,
                     param("lambda", lambda)));
  rows.push_back(tag(diagnostic("n1_residual_as_printed", std::abs(df1 - f1)), 1, 0.0, param("lambda", lambda)));

  const std::vector<double> steps{0.1, 0.05, 0.025, 0.0125};
  const OdeConvergence one = mellin_barnes_ode_convergence(1, lambda, steps);
  rows.push_back(tag(diagnostic("n1_fd_order_sign_flipped", one.order_minus), 1, 0.0, param("lambda", lambda)));

  const OdeConvergence two = mellin_barnes_ode_convergence(2, lambda, steps);
  const double target = c.tolerances.at("ode_order");
  rows.push_back(tag(make_check("n2_best_sign_order", two.order_best, 0.0, target, c.tolerances.at("ode_order_band"),
                                Rule::abs_diff_le),
                     2, 0.0, param("lambda", lambda)));
  const OdeResidual& finest = two.residuals.back();
  rows.push_back(tag(diagnostic("n2_residual_plus_finest", finest.residual_plus), 2, 0.0, param("h", steps.back())));
  rows.push_back(tag(diagnostic("n2_residual_minus_finest", finest.residual_minus), 2, 0.0, param("h", steps.back())));
  // The log-Euler form (lambda d/dlambda)^n F = (-n lambda)^n F holds for every n.
  rows.push_back(tag(make_check("n2_log_euler_order", two.order_log_euler, 0.0, target,
                                c.tolerances.at("ode_order_band"), Rule::abs_diff_le, false),
                     2, 0.0, param("lambda", lambda)));
  return rows;
}

using CriterionFn = std::vector<CheckRow> (*)(const RunContext&);

constexpr CriterionFn kCriterionFns[kCriterionCount] = {
    criterion_weak_density, criterion_refinement,   criterion_weight_cancellation, criterion_laplace_estimator,
    criterion_invariance,   criterion_thinning,     criterion_pd_cross,            criterion_maxwell_poincare,
    criterion_mellin_barnes, criterion_orbit_laplace, criterion_cycles,            criterion_primes,
    criterion_dickman,      criterion_signed,       criterion_ode,
};

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ParameterError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

double positive_number(const nlohmann::json& v, const char* key) {
  if (!v.is_number()) throw ParameterError(std::string(key) + " must be a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError(std::string(key) + " must be positive and finite");
  return x;
}

std::uint64_t nonnegative_integer(const nlohmann::json& v, const char* key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ParameterError(std::string(key) + " must be a nonnegative integer");
}

bool boolean(const nlohmann::json& v, const char* key) {
  if (!v.is_boolean()) throw ParameterError(std::string(key) + " must be true or false");
  return v.get<bool>();
}

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "maxwell-poincare", "orbit-laplace", "mellin-barnes", "weak-density", "thinning",     "pd-cross",
      "cycles",           "primes",        "invariance",    "zagier-probe", "window-probe", "gamma-weight",
      "dickman",          "signed",        "ode-residual",
  };
  return names;
}

StepFunctiond step_function_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("step function must be an object with masses and values");
  require_keys(j, {"masses", "values"}, "step function");
  if (!j.contains("masses") || !j.contains("values")) throw ParameterError("step function needs masses and values");
  const auto& m = j.at("masses");
  const auto& v = j.at("values");
  if (!m.is_array() || !v.is_array() || m.empty()) throw ParameterError("masses and values must be nonempty arrays");
  if (m.size() != v.size()) throw ParameterError("masses and values differ in length");
  Eigen::VectorXd masses(static_cast<Eigen::Index>(m.size()));
  Eigen::VectorXd values(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m[k].is_number() || !v[k].is_number()) throw ParameterError("masses and values must be numbers");
    masses[static_cast<Eigen::Index>(k)] = m[k].get<double>();
    values[static_cast<Eigen::Index>(k)] = v[k].get<double>();
  }
  return StepFunctiond(MeshPartitiond(masses), values);
}

nlohmann::ordered_json step_function_to_json(const StepFunctiond& f) {
  nlohmann::ordered_json j;
  j["masses"] = std::vector<double>(f.partition().masses().begin(), f.partition().masses().end());
  j["values"] = std::vector<double>(f.values().begin(), f.values().end());
  return j;
}

std::string step_function_hash(const StepFunctiond& f) {
  std::uint32_t h = 2166136261u;
  auto mix = [&](const Eigen::VectorXd& v) {
    for (double x : v) {
      for (char ch : format_number(x) + ",") {
        h ^= static_cast<unsigned char>(ch);
        h *= 16777619u;
      }
    }
  };
  mix(f.partition().masses());
  mix(f.values());
  char buf[16];
  std::snprintf(buf, sizeof buf, "f:%08x", h);
  return buf;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  require_keys(j,
               {"experiment", "theta", "n", "samples", "seed", "window", "lambda", "f", "tolerances", "output",
                "format", "threads", "quick", "dump"},
               "config");
  ExperimentConfig c;
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) throw ParameterError("experiment must be a string");
    c.experiment = j["experiment"].get<std::string>();
  }
  if (j.contains("theta")) c.theta = positive_number(j["theta"], "theta");
  if (j.contains("n")) {
    const auto n = nonnegative_integer(j["n"], "n");
    if (n < 1 || n > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw ParameterError("n out of range");
    c.n = static_cast<int>(n);
  }
  if (j.contains("samples")) c.samples = nonnegative_integer(j["samples"], "samples");
  if (j.contains("seed")) c.seed = nonnegative_integer(j["seed"], "seed");
  if (j.contains("window")) c.window = positive_number(j["window"], "window");
  if (j.contains("lambda")) c.lambda = positive_number(j["lambda"], "lambda");
  if (j.contains("f")) c.f = step_function_from_json(j["f"]);
  if (j.contains("tolerances")) {
    ToleranceTable::defaults().override_with(j["tolerances"]);  // validates names
    c.tolerances = j["tolerances"];
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ParameterError("output must be a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("format")) {
    if (!j["format"].is_string()) throw ParameterError("format must be a string");
    c.format = parse_format(j["format"].get<std::string>());
  }
  if (j.contains("threads")) c.threads = static_cast<unsigned>(nonnegative_integer(j["threads"], "threads"));
  if (j.contains("quick")) c.quick = boolean(j["quick"], "quick");
  if (j.contains("dump")) c.dump = boolean(j["dump"], "dump");
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw ParameterError("unknown experiment '" + experiment + "'");
  }
  if (theta && !(*theta > 0.0 && std::isfinite(*theta))) throw ParameterError("theta must be positive");
  if (samples && (*samples < 2 || *samples > 100000000)) throw ParameterError("samples must be in [2, 1e8]");
  if (window && !(*window > 0.0)) throw ParameterError("window must be positive");
  if (lambda && !(*lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (threads > 1024) throw ParameterError("threads must be at most 1024");
  if (n) {
    const int v = *n;
    if (experiment == "maxwell-poincare" && v < 3) throw ParameterError("maxwell-poincare needs n >= 3");
    if (experiment == "orbit-laplace" && v > 20) throw ParameterError("orbit-laplace needs n <= 20");
    if (experiment == "mellin-barnes" && v > kMellinBarnesMaxQuadratureN) {
      throw ParameterError("mellin-barnes needs n <= " + std::to_string(kMellinBarnesMaxQuadratureN));
    }
    if (experiment == "thinning" && v > 8) throw ParameterError("thinning needs 1 <= n <= 8 classes");
    if (experiment == "primes" && v < 10000) throw ParameterError("primes needs n >= 10000");
    if (experiment == "zagier-probe" && v > 20) throw ParameterError("zagier-probe needs n <= 20");
    if (experiment == "window-probe" && (v < 2 || v > 20)) throw ParameterError("window-probe needs 2 <= n <= 20");
  }
  if (f && (experiment == "weak-density" || experiment == "gamma-weight") && !f->positive()) {
    throw ParameterError("f must be positive for " + experiment);
  }
  ToleranceTable::defaults().override_with(tolerances);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["theta"] = optional_json(theta);
  j["n"] = optional_json(n);
  j["samples"] = optional_json(samples);
  j["seed"] = seed;
  j["window"] = optional_json(window);
  j["lambda"] = optional_json(lambda);
  j["f"] = f ? step_function_to_json(*f) : nlohmann::ordered_json(nullptr);
  j["tolerances"] = nlohmann::ordered_json(tolerances);
  j["format"] = format == Format::csv ? "csv" : "json";
  j["quick"] = quick;
  j["dump"] = dump;
  return j;
}

const char* criterion_title(int id) {
  if (id < 1 || id > kCriterionCount) throw ParameterError("criterion id out of range");
  return kCriteria[id - 1].title;
}

const char* criterion_experiment(int id) {
  if (id < 1 || id > kCriterionCount) throw ParameterError("criterion id out of range");
  return kCriteria[id - 1].experiment;
}

std::vector<CheckRow> run_criterion(int id, const RunContext& ctx) {
  if (id < 1 || id > kCriterionCount) throw ParameterError("criterion id out of range");
  return kCriterionFns[id - 1](ctx);
}

CheckRow fold_criterion(int id, const std::vector<CheckRow>& rows) {
  int gating = 0, passed = 0;
  for (const auto& r : rows) {
    if (!r.gating) continue;
    ++gating;
    if (r.pass) ++passed;
  }
  char name[64];
  std::snprintf(name, sizeof name, "criterion_%02d", id);
  CheckRow row = make_check(name, passed, 0.0, gating, gating, Rule::ge);
  row.n = static_cast<int>(rows.size());
  row.param = criterion_title(id);
  return row;
}

std::vector<CheckRow> run_zagier_probe(const RunContext& ctx) {
  const double lambda = ctx.lambda.value_or(1.0);
  const int n_max = ctx.n.value_or(ctx.quick ? 8 : 10);
  const std::size_t samples = pick(ctx, 20000, 2000);
  std::vector<CheckRow> rows;
  for (const ZagierRow& z : zagier_limit_probe(RngStream(ctx.seed, 90000), lambda, n_max, samples, 4, ctx.threads)) {
    rows.push_back(tag(diagnostic("Fn_root", z.value, z.stderr_), z.n, 0.0, param("lambda", lambda) + ";" + z.method));
    if (z.n > 1) {
      rows.push_back(tag(diagnostic("Fn_root_difference", z.difference, z.difference_stderr), z.n, 0.0,
                         param("lambda", lambda)));
    }
  }
  return rows;
}

std::vector<CheckRow> run_window_probe(const RunContext& ctx) {
  const int n = ctx.n.value_or(3);
  const double theta = ctx.theta.value_or(1.0);
  const std::size_t samples = pick(ctx, 100000, 10000);
  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<CheckRow> rows;
  for (const WindowVolumeRow& w : lebesgue_window_volume(RngStream(ctx.seed, 91000), n, theta, grid, samples,
                                                         default_proposal_sigma(n), ctx.threads)) {
    rows.push_back(tag(diagnostic("window_volume", w.volume, w.stderr_), n, theta, param("s", w.s)));
    rows.push_back(tag(diagnostic("window_volume_over_s", w.volume / w.s, w.stderr_ / w.s), n, theta, param("s", w.s)));
  }
  return rows;
}

ExperimentReport run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.seed = config.seed;
  ctx.quick = config.quick;
  ctx.threads = resolve_threads(config.threads);
  ctx.tolerances.override_with(config.tolerances);
  ctx.theta = config.theta;
  ctx.n = config.n;
  ctx.samples = config.samples;
  ctx.window = config.window;
  ctx.lambda = config.lambda;
  ctx.f = config.f;
  SampleDump dump;
  if (config.dump) ctx.dump = &dump;

  ExperimentReport report;
  report.experiment = config.experiment;
  report.config = config.to_json();
  report.tolerances = ctx.tolerances;
  if (config.experiment == "zagier-probe") {
    report.rows = run_zagier_probe(ctx);
  } else if (config.experiment == "window-probe") {
    report.rows = run_window_probe(ctx);
  } else {
    for (int id = 1; id <= kCriterionCount; ++id) {
      if (config.experiment != criterion_experiment(id)) continue;
      for (auto& row : run_criterion(id, ctx)) report.rows.push_back(std::move(row));
    }
  }
  report.dump_header = std::move(dump.header);
  report.dump_rows = std::move(dump.rows);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ExperimentReport verify_all(std::uint64_t seed, bool quick, unsigned threads, const ToleranceTable& tolerances,
                            const std::function<void(int, const CheckRow&, double)>& progress) {
  const auto start = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.seed = seed;
  ctx.quick = quick;
  ctx.threads = resolve_threads(threads);
  ctx.tolerances = tolerances;
  ExperimentReport report;
  report.experiment = "verify";
  report.tolerances = tolerances;
  report.config["seed"] = seed;
  report.config["quick"] = quick;
  for (int id = 1; id <= kCriterionCount; ++id) {
    const auto t0 = std::chrono::steady_clock::now();
    const CheckRow row = fold_criterion(id, run_criterion(id, ctx));
    if (progress) progress(id, row, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    report.rows.push_back(row);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace lebesgue

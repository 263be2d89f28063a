#include "lebesgue/universality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "lebesgue/errors.hpp"
#include "lebesgue/measures.hpp"
#include "lebesgue/parallel.hpp"
#include "lebesgue/quadrature.hpp"
#include "lebesgue/special.hpp"

namespace lebesgue {

namespace {

constexpr std::size_t kSeriesTerms = 1 << 16;
constexpr double kSeriesTailEps = 1e-10;

void require_theta(double theta, const char* where) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError(std::string(where) + ": theta must be positive");
}

std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e > 0) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

// Pollard rho with Brent cycle detection; n odd composite.
std::uint64_t pollard_brent(std::uint64_t n) {
  for (std::uint64_t c = 1;; ++c) {
    auto f = [&](std::uint64_t x) { return (mul_mod(x, x, n) + c) % n; };
    std::uint64_t y = 2, x = 2, g = 1, q = 1, ys = 2;
    std::uint64_t r = 1;
    constexpr std::uint64_t m = 128;
    do {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = f(y);
      std::uint64_t k = 0;
      do {
        ys = y;
        for (std::uint64_t i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r <<= 1;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void factor_into(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  const std::uint64_t d = pollard_brent(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace

Eigen::VectorXd CycleProfile::normalized() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(cycle_lengths.size()));
  for (std::size_t k = 0; k < cycle_lengths.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = static_cast<double>(cycle_lengths[k]) / n;
  }
  return v;
}

CycleProfile ewens_cycles(RngStream& rng, int n, double theta) {
  require_theta(theta, "ewens_cycles");
  if (n < 1) throw ParameterError("ewens_cycles: n must be positive");
  // Customer i opens a table w.p. theta / (theta + i), else sits next to a
  // uniformly chosen earlier customer. Tables are the cycles.
  std::vector<int> table_of(static_cast<std::size_t>(n));
  std::vector<int> sizes;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (i == 0 || u * (theta + i) < theta) {
      table_of[static_cast<std::size_t>(i)] = static_cast<int>(sizes.size());
      sizes.push_back(1);
    } else {
      int j = static_cast<int>(rng.uniform() * i);
      if (j >= i) j = i - 1;
      const int t = table_of[static_cast<std::size_t>(j)];
      table_of[static_cast<std::size_t>(i)] = t;
      ++sizes[static_cast<std::size_t>(t)];
    }
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return CycleProfile{n, std::move(sizes)};
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic base set for 64-bit integers.
  for (std::uint64_t a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
    const std::uint64_t base = a % n;
    if (base == 0) continue;
    std::uint64_t x = pow_mod(base, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

std::vector<std::uint64_t> factorize(std::uint64_t n) {
  if (n < 1) throw ParameterError("factorize: n must be positive");
  std::vector<std::uint64_t> out;
  for (std::uint64_t p : {2ull, 3ull, 5ull}) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  // Wheel mod 30 below 10^8; larger cofactors go to Miller-Rabin and Pollard rho.
  constexpr std::uint64_t kTrialLimit = 100000000ull;
  constexpr int kGaps[8] = {4, 2, 4, 2, 4, 6, 2, 6};
  const bool trial_only = n < kTrialLimit;
  const std::uint64_t bound = trial_only ? n : 1000;
  std::uint64_t p = 7;
  for (int g = 0; p * p <= n && p <= bound; p += kGaps[g], g = (g + 1) % 8) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) {
    if (trial_only || p * p > n) out.push_back(n);
    else factor_into(n, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PrimeProfile prime_profile(std::uint64_t n) {
  if (n < 2) throw ParameterError("prime_profile: n must be at least 2");
  PrimeProfile prof;
  prof.n = n;
  prof.primes = factorize(n);
  std::reverse(prof.primes.begin(), prof.primes.end());
  const double ln_n = std::log(static_cast<double>(n));
  prof.components.resize(static_cast<Eigen::Index>(prof.primes.size()));
  for (std::size_t k = 0; k < prof.primes.size(); ++k) {
    prof.components(static_cast<Eigen::Index>(k)) = std::log(static_cast<double>(prof.primes[k])) / ln_n;
  }
  return prof;
}

PrimeExperimentReport prime_universality_experiment(const RngStream& rng, std::uint64_t n_max, std::size_t samples,
                                                    bool keep_profiles, unsigned threads) {
  if (n_max < 2) throw ParameterError("prime_universality_experiment: n_max must be at least 2");
  if (samples == 0) throw ParameterError("prime_universality_experiment: samples must be positive");
  std::vector<PrimeProfile> profiles(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream s = rng.split(i);
    const std::uint64_t span = n_max - 1;
    std::uint64_t n = 2 + static_cast<std::uint64_t>(s.uniform() * static_cast<double>(span));
    n = std::min(n, n_max);
    profiles[i] = prime_profile(n);
  });
  std::vector<double> largest(samples);
  std::size_t above = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    largest[i] = profiles[i].components(0);
    if (largest[i] > 0.5) ++above;
  }
  PrimeExperimentReport rep;
  rep.n_max = n_max;
  rep.samples = samples;
  rep.fraction_above_half = static_cast<double>(above) / static_cast<double>(samples);
  rep.sup_distance = stats::ks_statistic_unsorted(largest, [](double u) { return u <= 0.0 ? 0.0 : dickman_rho(1.0 / u); });
  if (keep_profiles) rep.profiles = std::move(profiles);
  return rep;
}

DickmanSolver::DickmanSolver(double u_max, double tolerance) : u_max_(u_max) {
  if (!(u_max >= 1.0)) throw ParameterError("DickmanSolver: u_max must be at least 1");
  if (!(tolerance > 0.0)) throw ParameterError("DickmanSolver: tolerance must be positive");
  int n = 64;
  solve(n);
  std::vector<double> coarse = values_;
  constexpr int kMaxSteps = 1 << 15;
  while (n < kMaxSteps) {
    n *= 2;
    solve(n);
    double diff = 0.0;
    for (std::size_t j = 0; j < coarse.size(); ++j) diff = std::max(diff, std::abs(coarse[j] - values_[2 * j]));
    if (diff < tolerance) break;
    coarse = values_;
  }
}

void DickmanSolver::solve(int steps_per_unit) {
  steps_per_unit_ = steps_per_unit;
  h_ = 1.0 / steps_per_unit;
  const auto units = static_cast<std::size_t>(std::ceil(u_max_ - 1.0));
  const std::size_t nodes = units * static_cast<std::size_t>(steps_per_unit) + 1;
  values_.assign(nodes, 0.0);
  derivatives_.assign(nodes, 0.0);
  const auto N = static_cast<std::size_t>(steps_per_unit);
  // Delayed value rho(u - 1) at node j or at the midpoint after node j.
  auto delayed_node = [&](std::size_t j) { return j < N ? 1.0 : values_[j - N]; };
  auto delayed_mid = [&](std::size_t j) {
    if (j < N) return 1.0;
    const std::size_t k = j - N;
    return 0.5 * (values_[k] + values_[k + 1]) + 0.125 * h_ * (derivatives_[k] - derivatives_[k + 1]);
  };
  values_[0] = 1.0;
  derivatives_[0] = -1.0;
  for (std::size_t j = 0; j + 1 < nodes; ++j) {
    const double u = 1.0 + static_cast<double>(j) * h_;
    const double k1 = -delayed_node(j) / u;
    const double k2 = -delayed_mid(j) / (u + 0.5 * h_);
    const double k4 = -delayed_node(j + 1) / (u + h_);
    values_[j + 1] = values_[j] + h_ / 6.0 * (k1 + 4.0 * k2 + k4);
    derivatives_[j + 1] = k4;
  }
}

double DickmanSolver::interpolate(double u) const {
  const double x = (u - 1.0) / h_;
  auto j = static_cast<std::size_t>(x);
  if (j + 1 >= values_.size()) j = values_.size() - 2;
  const double t = x - static_cast<double>(j);
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values_[j] + (t3 - 2 * t2 + t) * h_ * derivatives_[j] +
         (-2 * t3 + 3 * t2) * values_[j + 1] + (t3 - t2) * h_ * derivatives_[j + 1];
}

double DickmanSolver::operator()(double u) const {
  if (std::isnan(u)) throw DomainError("dickman_rho: u is NaN");
  if (u < 0.0) return 0.0;
  if (u <= 1.0) return 1.0;
  if (u > u_max_) return 0.0;  // below 1e-60 for the default range
  return interpolate(u);
}

double dickman_rho(double u) {
  static const DickmanSolver solver;
  return solver(u);
}

double dickman_rho_quadrature(double u) {
  if (std::isnan(u)) throw DomainError("dickman_rho_quadrature: u is NaN");
  if (u > 4.0) throw ParameterError("dickman_rho_quadrature: u must be at most 4");
  if (u < 0.0) return 0.0;
  if (u <= 1.0) return 1.0;
  const double k = std::floor(u) == u ? u - 1.0 : std::floor(u);
  const double start = dickman_rho_quadrature(k);
  const auto r = quad::integrate([](double t) { return dickman_rho_quadrature(t - 1.0) / t; }, k, u, 1e-14, 1e-13);
  return start - r.value;
}

std::vector<double> pd_largest_parts(const RngStream& rng, double theta, std::size_t samples, unsigned threads) {
  require_theta(theta, "pd_largest_parts");
  std::vector<double> out(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream s = rng.split(i);
    out[i] = pd_sample(s, theta, kSeriesTerms, kSeriesTailEps).terms(0);
  });
  return out;
}

std::vector<double> jump_largest_parts(const RngStream& rng, double theta, std::size_t samples, unsigned threads) {
  require_theta(theta, "jump_largest_parts");
  std::vector<double> out(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream s = rng.split(i);
    out[i] = normalized_jumps(s, theta, kSeriesTerms, kSeriesTailEps).terms(0);
  });
  return out;
}

std::vector<double> cycle_largest_parts(const RngStream& rng, int n, double theta, std::size_t samples,
                                        unsigned threads) {
  std::vector<double> out(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream s = rng.split(i);
    out[i] = static_cast<double>(ewens_cycles(s, n, theta).cycle_lengths.front()) / n;
  });
  return out;
}

stats::MeanEstimate largest_part_mean(const RngStream& rng, double theta, std::size_t samples, unsigned threads) {
  if (samples == 0) throw ParameterError("largest_part_mean: samples must be positive");
  const auto parts = pd_largest_parts(rng, theta, samples, threads);
  return stats::mc_mean_stderr(parts);
}

namespace {

// Weighted joint ECDF of 2-D points evaluated at query points by a sweep
// over the first coordinate with a Fenwick tree on the second.
std::vector<double> weighted_joint_ecdf_2d(const std::vector<double>& x, const std::vector<double>& y,
                                           const std::vector<double>& w, const std::vector<double>& qx,
                                           const std::vector<double>& qy) {
  std::vector<double> ys(y);
  std::sort(ys.begin(), ys.end());
  std::vector<double> tree(ys.size() + 1, 0.0);
  auto add = [&](std::size_t pos, double v) {
    for (++pos; pos < tree.size(); pos += pos & (~pos + 1)) tree[pos] += v;
  };
  auto prefix = [&](std::size_t count) {
    double s = 0.0;
    for (; count > 0; count -= count & (~count + 1)) s += tree[count];
    return s;
  };
  std::vector<std::size_t> pts(x.size()), qs(qx.size());
  std::iota(pts.begin(), pts.end(), 0);
  std::iota(qs.begin(), qs.end(), 0);
  std::sort(pts.begin(), pts.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::sort(qs.begin(), qs.end(), [&](std::size_t a, std::size_t b) { return qx[a] < qx[b]; });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> out(qx.size());
  std::size_t next = 0;
  for (std::size_t q : qs) {
    while (next < pts.size() && x[pts[next]] <= qx[q]) {
      const std::size_t p = pts[next++];
      add(static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y[p]) - ys.begin()), w[p]);
    }
    const auto count = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), qy[q]) - ys.begin());
    out[q] = prefix(count) / total;
  }
  return out;
}

}  // namespace

ThinningReport thinning_partition_test(const RngStream& rng, double theta, int classes, std::size_t samples,
                                       double window, unsigned threads) {
  require_theta(theta, "thinning_partition_test");
  if (classes < 1) throw ParameterError("thinning_partition_test: classes must be positive");
  if (samples < 2) throw ParameterError("thinning_partition_test: need at least two samples");
  if (!(window > 0.0)) throw ParameterError("thinning_partition_test: window must be positive");
  const auto r = static_cast<std::size_t>(classes);

  ThinningReport rep;
  rep.theta = theta;
  rep.classes = classes;
  rep.samples = samples;
  rep.window = window;
  rep.class_sums.assign(r, std::vector<double>(samples, 0.0));
  parallel_for(samples, threads, [&](std::size_t i) {
    RngStream s = rng.split(i);
    const SeriesPoint jumps = gamma_subordinator_jumps(s, theta, kSeriesTerms, kSeriesTailEps);
    for (Eigen::Index k = 0; k < jumps.terms.size(); ++k) {
      auto c = static_cast<std::size_t>(s.uniform() * static_cast<double>(r));
      if (c >= r) c = r - 1;
      rep.class_sums[c][i] += jumps.terms(k);
    }
  });

  const double shape = theta / classes;
  for (std::size_t c = 0; c < r; ++c) {
    rep.ks_per_class.push_back(
        stats::ks_statistic_unsorted(rep.class_sums[c], [shape](double x) { return gamma_cdf(shape, x); }));
  }
  rep.ks_critical_1pct = stats::ks_critical_one_sample(samples, stats::kGatingAlpha);
  rep.correlation_bound = 3.0 / std::sqrt(static_cast<double>(samples));
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      rep.max_abs_correlation =
          std::max(rep.max_abs_correlation, std::abs(stats::pearson_correlation(rep.class_sums[a], rep.class_sums[b])));
    }
  }

  // Window reweighting by exp(total mass): class sums become independent with
  // densities proportional to s^{theta/r - 1} on [0, M].
  std::vector<std::size_t> kept;
  std::vector<double> weights;
  for (std::size_t i = 0; i < samples; ++i) {
    bool inside = true;
    double total = 0.0;
    for (std::size_t c = 0; c < r; ++c) {
      inside = inside && rep.class_sums[c][i] <= window;
      total += rep.class_sums[c][i];
    }
    if (inside) {
      kept.push_back(i);
      weights.push_back(std::exp(total));
    }
  }
  rep.accepted = kept.size();
  if (kept.empty()) {
    rep.weighted_sup_distance = 1.0;
    return rep;
  }
  rep.effective_sample_size = stats::effective_sample_size(weights);
  auto target = [&](const std::vector<double>& point) {
    double p = 1.0;
    for (double s : point) p *= std::pow(std::min(s, window) / window, shape);
    return p;
  };

  if (r == 1) {
    std::vector<double> v;
    for (std::size_t i : kept) v.push_back(rep.class_sums[0][i]);
    rep.weighted_sup_distance =
        stats::weighted_ecdf(v, weights).sup_distance([&](double s) { return target({s}); });
  } else if (r == 2) {
    std::vector<double> x, y;
    for (std::size_t i : kept) {
      x.push_back(rep.class_sums[0][i]);
      y.push_back(rep.class_sums[1][i]);
    }
    // Query at every kept point and on a grid of marginal target quantiles.
    std::vector<double> qx(x), qy(y);
    constexpr int kGrid = 256;
    for (int a = 1; a <= kGrid; ++a) {
      for (int b = 1; b <= kGrid; ++b) {
        qx.push_back(window * std::pow(static_cast<double>(a) / kGrid, 1.0 / shape));
        qy.push_back(window * std::pow(static_cast<double>(b) / kGrid, 1.0 / shape));
      }
    }
    const auto ecdf = weighted_joint_ecdf_2d(x, y, weights, qx, qy);
    double d = 0.0;
    for (std::size_t q = 0; q < qx.size(); ++q) d = std::max(d, std::abs(ecdf[q] - target({qx[q], qy[q]})));
    rep.weighted_sup_distance = d;
  } else {
    // Brute force at up to 2000 kept points.
    const std::size_t stride = std::max<std::size_t>(1, kept.size() / 2000);
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double d = 0.0;
    for (std::size_t q = 0; q < kept.size(); q += stride) {
      std::vector<double> point(r);
      for (std::size_t c = 0; c < r; ++c) point[c] = rep.class_sums[c][kept[q]];
      double below = 0.0;
      for (std::size_t p = 0; p < kept.size(); ++p) {
        bool le = true;
        for (std::size_t c = 0; c < r && le; ++c) le = rep.class_sums[c][kept[p]] <= point[c];
        if (le) below += weights[p];
      }
      d = std::max(d, std::abs(below / total - target(point)));
    }
    rep.weighted_sup_distance = d;
  }
  return rep;
}

}  // namespace lebesgue

#include "lebesgue/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lebesgue/errors.hpp"

namespace lebesgue::stats {

double kolmogorov_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(0.5 * alpha)); }

double ks_critical_one_sample(std::size_t n, double alpha) {
  return kolmogorov_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return kolmogorov_coefficient(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

double ks_statistic(std::span<const double> sorted_sample, const std::function<double(double)>& cdf) {
  if (sorted_sample.empty()) throw ParameterError("ks_statistic: empty sample");
  const double n = static_cast<double>(sorted_sample.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted_sample.size()) {
    std::size_t j = i;
    while (j + 1 < sorted_sample.size() && sorted_sample[j + 1] == sorted_sample[i]) ++j;
    const double f = cdf(sorted_sample[i]);
    d = std::max({d, static_cast<double>(j + 1) / n - f, f - static_cast<double>(i) / n});
    i = j + 1;
  }
  return d;
}

double ks_statistic_tabulated(std::span<const double> sorted_sample, std::span<const double> cdf_values) {
  if (sorted_sample.empty()) throw ParameterError("ks_statistic: empty sample");
  if (cdf_values.size() != sorted_sample.size()) throw ParameterError("ks_statistic: size mismatch");
  std::size_t idx = 0;
  auto lookup = [&](double x) {
    while (sorted_sample[idx] != x) ++idx;
    return cdf_values[idx];
  };
  return ks_statistic(sorted_sample, lookup);
}

double ks_statistic_unsorted(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  return ks_statistic(sample, cdf);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ParameterError("ks_two_sample: empty input");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) x = a[i];
    else x = b[j];
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

WeightedEcdf::WeightedEcdf(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw ParameterError("weighted_ecdf: size mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  CompensatedSum total;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterError("weighted_ecdf: weights must be nonnegative");
    total.add(w);
  }
  total_ = total.value();
  if (!(total_ > 0.0)) throw ParameterError("weighted_ecdf: all weights are zero");
  CompensatedSum running;
  for (std::size_t k = 0; k < order.size(); ++k) {
    running.add(weights[order[k]]);
    const double x = values[order[k]];
    if (!values_.empty() && values_.back() == x) {
      cumulative_.back() = running.value() / total_;
    } else {
      values_.push_back(x);
      cumulative_.push_back(running.value() / total_);
    }
  }
  cumulative_.back() = 1.0;
}

double WeightedEcdf::operator()(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  if (it == values_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double WeightedEcdf::sup_distance(const std::function<double(double)>& cdf) const {
  double d = 0.0;
  double before = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double f = cdf(values_[k]);
    d = std::max({d, std::abs(cumulative_[k] - f), std::abs(f - before)});
    before = cumulative_[k];
  }
  return d;
}

WeightedEcdf weighted_ecdf(std::span<const double> values, std::span<const double> weights) {
  return WeightedEcdf(values, weights);
}

MeanEstimate mc_mean_stderr(std::span<const double> values, std::optional<std::span<const double>> weights,
                            int batches) {
  if (values.empty()) throw ParameterError("mc_mean_stderr: empty input");
  if (weights && weights->size() != values.size()) throw ParameterError("mc_mean_stderr: size mismatch");
  const std::size_t n = values.size();
  MeanEstimate out;
  out.count = n;

  auto weight_at = [&](std::size_t i) { return weights ? (*weights)[i] : 1.0; };
  CompensatedSum num, den;
  for (std::size_t i = 0; i < n; ++i) {
    num.add(weight_at(i) * values[i]);
    den.add(weight_at(i));
  }
  if (!(den.value() > 0.0)) throw ParameterError("mc_mean_stderr: total weight is zero");
  out.mean = num.value() / den.value();

  const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
  if (constant) {
    out.mean = values[0];
    return out;
  }

  if (n < static_cast<std::size_t>(batches) || batches < 2) {
    // Plain (weighted) sample-variance error with the fallback flag raised.
    out.single_batch = true;
    if (n < 2) return out;
    CompensatedSum sq;
    double w2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weight_at(i) / den.value();
      sq.add(w * w * (values[i] - out.mean) * (values[i] - out.mean));
      w2 += w * w;
    }
    out.stderr_ = std::sqrt(sq.value() / std::max(1e-300, 1.0 - w2));
    return out;
  }

  std::vector<double> leave_out(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(batches);
    const std::size_t hi = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(batches);
    CompensatedSum bn, bd;
    for (std::size_t i = lo; i < hi; ++i) {
      bn.add(weight_at(i) * values[i]);
      bd.add(weight_at(i));
    }
    const double rest = den.value() - bd.value();
    leave_out[static_cast<std::size_t>(b)] = rest > 0.0 ? (num.value() - bn.value()) / rest : out.mean;
  }
  const double center = std::accumulate(leave_out.begin(), leave_out.end(), 0.0) / batches;
  double ss = 0.0;
  for (double v : leave_out) ss += (v - center) * (v - center);
  out.stderr_ = std::sqrt(ss * (batches - 1) / batches);
  return out;
}

double effective_sample_size(std::span<const double> weights) {
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("pearson_correlation: bad sizes");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) compensation_ += (sum_ - t) + x;
  else compensation_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace lebesgue::stats

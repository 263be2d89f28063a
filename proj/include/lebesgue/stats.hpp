#ifndef LEBESGUE_STATS_HPP
#define LEBESGUE_STATS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace lebesgue::stats {

/// Significance levels used across the lab.
inline constexpr double kGatingAlpha = 0.01;
inline constexpr double kDiagnosticAlpha = 0.05;
inline constexpr int kJackknifeBatches = 32;

/// Asymptotic Kolmogorov coefficient c(alpha) = sqrt(-ln(alpha/2)/2).
double kolmogorov_coefficient(double alpha);
double ks_critical_one_sample(std::size_t n, double alpha);
double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha);

/// sup |ECDF - cdf| for a sorted, nonempty sample.
double ks_statistic(std::span<const double> sorted_sample, const std::function<double(double)>& cdf);

/// KS distance when the CDF has already been tabulated at each sorted sample point.
double ks_statistic_tabulated(std::span<const double> sorted_sample, std::span<const double> cdf_values);

/// Sorts a copy and calls ks_statistic.
double ks_statistic_unsorted(std::vector<double> sample, const std::function<double(double)>& cdf);

/// sup distance between the two empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

class WeightedEcdf {
 public:
  WeightedEcdf(std::span<const double> values, std::span<const double> weights);

  /// Normalized weight of values <= x.
  double operator()(double x) const;

  /// sup |this - cdf| over the step points (both one-sided limits).
  double sup_distance(const std::function<double(double)>& cdf) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  double total_weight() const { return total_; }

 private:
  std::vector<double> values_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

WeightedEcdf weighted_ecdf(std::span<const double> values, std::span<const double> weights);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
  bool single_batch = false;  // too few values for the batched jackknife
};

/// Mean with a delete-one-batch jackknife standard error over contiguous batches.
/// With weights the estimator is the ratio sum(w v) / sum(w).
MeanEstimate mc_mean_stderr(std::span<const double> values,
                            std::optional<std::span<const double>> weights = std::nullopt,
                            int batches = kJackknifeBatches);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace lebesgue::stats

#endif  // LEBESGUE_STATS_HPP

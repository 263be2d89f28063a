#ifndef LEBESGUE_MEASURES_HPP
#define LEBESGUE_MEASURES_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lebesgue/rng.hpp"
#include "lebesgue/step_function.hpp"

namespace lebesgue {

/// Descending positive series with its total; a point of the cone of convergent series.
struct SeriesPoint {
  Eigen::VectorXd terms;
  double total = 0.0;
  double truncation_tail = 0.0;
  bool truncated = false;  // max_terms ran out before the tail dropped under tail_eps

  /// Throws PreconditionError when ordering, positivity or the total bookkeeping fails.
  void validate() const;
};

/// Finite discrete measure sum_k c_k delta_{x_k} on [0, 1].
struct DiscreteMeasure {
  Eigen::VectorXd coeffs;
  Eigen::VectorXd locations;
  bool signed_ = false;
  double tail_bound = 0.0;

  Eigen::Index size() const { return coeffs.size(); }

  /// Sum of coefficients in storage order. Importance weights and pairings
  /// use this exact loop so that exp(weight - <1, xi>) is exactly 1.
  double total_mass() const;

  /// <f, xi> = sum_k f(x_k) c_k
  double pair(const StepFunctiond& f) const;
  /// sum_k |f(x_k)| |c_k|, the pairing seen by the sign-symmetric transform.
  double pair_modulus(const StepFunctiond& f) const;

  void validate() const;
};

/// Samples of the gamma-process law reweighted by exp(total mass), restricted to a window.
struct WeightedEnsemble {
  std::vector<DiscreteMeasure> samples;
  std::vector<double> log_weights;
  std::vector<char> rejected;  // total mass above the window
  double window = 0.0;
  double theta = 0.0;
  std::uint64_t seed = 0;
  std::size_t truncation_warnings = 0;

  std::size_t size() const { return samples.size(); }
  std::size_t accepted_count() const;
};

struct StickBreaking {
  Eigen::VectorXd sticks;  // generation order
  double remaining = 1.0;
  bool truncated = false;
};

StickBreaking gem_stick_breaking(RngStream& rng, double theta, std::size_t max_terms, double tail_eps);

/// Sorted stick breaking; a truncated draw from PD(theta).
SeriesPoint pd_sample(RngStream& rng, double theta, std::size_t max_terms, double tail_eps);

/// Inverse-Levy-tail jumps J_k = inverse_levy_tail(theta, Gamma_k), stopped when the
/// tail bound Gamma_k * J_k drops below tail_eps times the running sum.
SeriesPoint gamma_subordinator_jumps(RngStream& rng, double theta, std::size_t max_terms, double tail_eps);

/// Same jumps normalized by their total.
SeriesPoint normalized_jumps(RngStream& rng, double theta, std::size_t max_terms, double tail_eps);

DiscreteMeasure attach_locations(RngStream& rng, const SeriesPoint& series);

struct EnsembleOptions {
  std::size_t max_terms = 4096;
  double tail_eps = 1e-10;
  unsigned threads = 1;
};

/// Sample i draws from rng.split(i), so the ensemble does not depend on the thread count.
WeightedEnsemble build_weighted_ensemble(const RngStream& rng, double theta, std::size_t n_samples, double window,
                                         const EnsembleOptions& options = {});

DiscreteMeasure sign_symmetrize(RngStream& rng, const DiscreteMeasure& m);

/// c_k -> c_k a(x_k)
DiscreteMeasure multiplier_action(const DiscreteMeasure& m, const StepFunctiond& a);

/// Additive coordinates b_k = -ln c_k.
DiscreteMeasure log_map(const DiscreteMeasure& m);
DiscreteMeasure exp_map(const DiscreteMeasure& logged);

/// b_k -> b_k + f(x_k) for a mean-zero step function f.
DiscreteMeasure additive_shift(const DiscreteMeasure& logged, const StepFunctiond& f);

}  // namespace lebesgue

#endif  // LEBESGUE_MEASURES_HPP

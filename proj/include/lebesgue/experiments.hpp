#ifndef LEBESGUE_EXPERIMENTS_HPP
#define LEBESGUE_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lebesgue/report.hpp"
#include "lebesgue/step_function.hpp"

namespace lebesgue {

/// Experiments reachable through `run`; each owns one or more acceptance criteria.
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment;
  std::optional<double> theta;
  std::optional<int> n;
  std::optional<std::size_t> samples;
  std::uint64_t seed = 20240601;
  std::optional<double> window;
  std::optional<double> lambda;
  std::optional<StepFunctiond> f;
  nlohmann::json tolerances = nlohmann::json::object();
  std::string output;  // empty writes to stdout
  Format format = Format::csv;
  unsigned threads = 0;  // 0 defers to LEBESGUE_THREADS, else 1
  bool quick = false;
  bool dump = false;

  /// Parses a JSON config; unknown keys and out-of-range values throw ParameterError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Echo for reports; output path and thread count are omitted since they never change results.
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

/// {"masses": [...], "values": [...]}
StepFunctiond step_function_from_json(const nlohmann::json& j);
nlohmann::ordered_json step_function_to_json(const StepFunctiond& f);
/// Short stable tag "f:xxxxxxxx" for report rows.
std::string step_function_hash(const StepFunctiond& f);

/// Optional raw-sample dump, one profile per row.
struct SampleDump {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Everything a criterion needs besides its own defaults.
struct RunContext {
  std::uint64_t seed = 20240601;
  bool quick = false;
  unsigned threads = 1;
  ToleranceTable tolerances = ToleranceTable::defaults();
  std::optional<double> theta;
  std::optional<int> n;
  std::optional<std::size_t> samples;
  std::optional<double> window;
  std::optional<double> lambda;
  std::optional<StepFunctiond> f;
  SampleDump* dump = nullptr;
};

inline constexpr int kCriterionCount = 15;

const char* criterion_title(int id);
/// Experiment whose `run` executes criterion `id`.
const char* criterion_experiment(int id);

/// Detailed rows of one acceptance criterion (1..15).
std::vector<CheckRow> run_criterion(int id, const RunContext& ctx);

/// One row summarizing a criterion: estimate = gating rows passed, tolerance = gating rows total.
CheckRow fold_criterion(int id, const std::vector<CheckRow>& rows);

/// Probe rows (never gating).
std::vector<CheckRow> run_zagier_probe(const RunContext& ctx);
std::vector<CheckRow> run_window_probe(const RunContext& ctx);

ExperimentReport run(const ExperimentConfig& config);

/// All criteria, one folded row each. `progress` sees each folded row and its wall time.
ExperimentReport verify_all(std::uint64_t seed, bool quick = false, unsigned threads = 1,
                            const ToleranceTable& tolerances = ToleranceTable::defaults(),
                            const std::function<void(int, const CheckRow&, double)>& progress = {});

}  // namespace lebesgue

#endif  // LEBESGUE_EXPERIMENTS_HPP

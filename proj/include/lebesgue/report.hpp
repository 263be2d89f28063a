#ifndef LEBESGUE_REPORT_HPP
#define LEBESGUE_REPORT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace lebesgue {

/// How a row's pass flag follows from its own numbers.
enum class Rule {
  le,           // estimate <= tolerance
  ge,           // estimate >= tolerance
  abs_diff_le,  // |estimate - oracle| <= tolerance
  within_se,    // |estimate - oracle| <= tolerance * stderr, stderr finite
};

const char* rule_name(Rule rule);
Rule parse_rule(const std::string& name);

struct CheckRow {
  std::string name;
  int n = 0;            // dimension or size parameter, 0 when not applicable
  double theta = 0.0;   // 0 when not applicable
  std::string param;    // lambda, f hash or other setting
  double estimate = 0.0;
  double stderr_ = 0.0;
  double oracle = 0.0;
  double tolerance = 0.0;
  Rule rule = Rule::abs_diff_le;
  bool gating = true;   // diagnostics never fail a run
  bool pass = false;
};

/// Recomputes the pass flag from estimate, stderr, oracle, tolerance and rule.
bool evaluate(const CheckRow& row);

CheckRow make_check(std::string name, double estimate, double stderr_, double oracle, double tolerance, Rule rule,
                    bool gating = true);

/// Versioned defaults for every gating threshold.
struct ToleranceTable {
  std::string version = "tol-v1";
  std::map<std::string, double> values;

  static ToleranceTable defaults();
  double at(const std::string& key) const;
  /// Throws ParameterError on unknown keys.
  void override_with(const nlohmann::json& overrides);
};

inline constexpr const char* kLabVersion = "0.1.0";

struct ExperimentReport {
  std::string experiment;
  nlohmann::ordered_json config;
  ToleranceTable tolerances;
  std::vector<CheckRow> rows;
  double wall_seconds = 0.0;  // printed to stderr only, so artifacts stay reproducible
  std::vector<std::string> dump_header;
  std::vector<std::vector<std::string>> dump_rows;

  bool passed() const;
  /// FNV-1a over the lab version and tolerance table.
  std::string version_hash() const;
};

enum class Format { csv, json };

Format parse_format(const std::string& name);

std::string to_csv(const ExperimentReport& report);
nlohmann::ordered_json to_json(const ExperimentReport& report);
std::string to_text(const ExperimentReport& report, Format format);

/// Writes the report; throws IoError naming the path on failure.
void emit(const ExperimentReport& report, Format format, const std::string& path);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& field);
/// Shortest round-trip decimal form; nan and inf spelled out.
std::string format_number(double value);

}  // namespace lebesgue

#endif  // LEBESGUE_REPORT_HPP

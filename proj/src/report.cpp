#include "lebesgue/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lebesgue/errors.hpp"

namespace lebesgue {

const char* rule_name(Rule rule) {
  switch (rule) {
    case Rule::le: return "le";
    case Rule::ge: return "ge";
    case Rule::abs_diff_le: return "abs_diff_le";
    case Rule::within_se: return "within_se";
  }
  return "?";
}

Rule parse_rule(const std::string& name) {
  if (name == "le") return Rule::le;
  if (name == "ge") return Rule::ge;
  if (name == "abs_diff_le") return Rule::abs_diff_le;
  if (name == "within_se") return Rule::within_se;
  throw ParameterError("unknown rule: " + name);
}

bool evaluate(const CheckRow& row) {
  switch (row.rule) {
    case Rule::le: return row.estimate <= row.tolerance;
    case Rule::ge: return row.estimate >= row.tolerance;
    case Rule::abs_diff_le: return std::abs(row.estimate - row.oracle) <= row.tolerance;
    case Rule::within_se:
      return std::isfinite(row.stderr_) && std::abs(row.estimate - row.oracle) <= row.tolerance * row.stderr_;
  }
  return false;
}

CheckRow make_check(std::string name, double estimate, double stderr_, double oracle, double tolerance, Rule rule,
                    bool gating) {
  CheckRow row;
  row.name = std::move(name);
  row.estimate = estimate;
  row.stderr_ = stderr_;
  row.oracle = oracle;
  row.tolerance = tolerance;
  row.rule = rule;
  row.gating = gating;
  row.pass = evaluate(row);
  return row;
}

ToleranceTable ToleranceTable::defaults() {
  ToleranceTable t;
  t.values = {
      {"quadrature_abs", 1e-8},
      {"merge_abs", 1e-8},
      {"invariance_rel", 1e-12},
      {"se_multiplier", 3.0},
      {"laplace_stderr_max", 0.01},
      {"ks_alpha", 0.01},
      {"correlation_multiplier", 3.0},
      {"thinning_weighted_sup", 0.02},
      {"mp_ks_max", 0.01},
      {"f2_abs", 1e-6},
      {"orbit_pairs_fraction", 0.94},
      {"prime_sup_max", 0.05},
      {"prime_half_abs", 0.02},
      {"dickman_abs", 1e-9},
      {"dickman_agree", 1e-8},
      {"ode_order", 2.0},
      {"ode_order_band", 0.2},
      {"stderr_scaling_rel", 0.2},
  };
  return t;
}

double ToleranceTable::at(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ParameterError("unknown tolerance: " + key);
  return it->second;
}

void ToleranceTable::override_with(const nlohmann::json& overrides) {
  if (!overrides.is_object()) throw ParameterError("tolerances must be an object");
  for (const auto& [key, value] : overrides.items()) {
    if (values.find(key) == values.end()) throw ParameterError("unknown tolerance: " + key);
    if (!value.is_number()) throw ParameterError("tolerance " + key + " must be a number");
    values[key] = value.get<double>();
  }
}

bool ExperimentReport::passed() const {
  for (const auto& row : rows) {
    if (row.gating && !row.pass) return false;
  }
  return true;
}

std::string ExperimentReport::version_hash() const {
  std::ostringstream os;
  os << kLabVersion << '|' << tolerances.version;
  for (const auto& [k, v] : tolerances.values) os << '|' << k << '=' << format_number(v);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ParameterError("unknown format: " + name);
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

nlohmann::ordered_json number_json(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

}  // namespace

std::string to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "experiment,name,n,theta,param,estimate,stderr,oracle,tolerance,rule,gating,pass,version\r\n";
  const std::string version = std::string(kLabVersion) + "+" + report.version_hash();
  for (const auto& r : report.rows) {
    os << csv_field(report.experiment) << ',' << csv_field(r.name) << ',' << r.n << ',' << format_number(r.theta)
       << ',' << csv_field(r.param) << ',' << format_number(r.estimate) << ',' << format_number(r.stderr_) << ','
       << format_number(r.oracle) << ',' << format_number(r.tolerance) << ',' << rule_name(r.rule) << ','
       << (r.gating ? "true" : "false") << ',' << (r.pass ? "true" : "false") << ',' << version << "\r\n";
  }
  return os.str();
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["version"] = kLabVersion;
  j["version_hash"] = report.version_hash();
  nlohmann::ordered_json tol;
  tol["version"] = report.tolerances.version;
  for (const auto& [k, v] : report.tolerances.values) tol[k] = v;
  j["tolerances"] = tol;
  j["config"] = report.config;
  j["passed"] = report.passed();
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["name"] = r.name;
    row["n"] = r.n;
    row["theta"] = number_json(r.theta);
    row["param"] = r.param;
    row["estimate"] = number_json(r.estimate);
    row["stderr"] = number_json(r.stderr_);
    row["oracle"] = number_json(r.oracle);
    row["tolerance"] = number_json(r.tolerance);
    row["rule"] = rule_name(r.rule);
    row["gating"] = r.gating;
    row["pass"] = r.pass;
    j["rows"].push_back(row);
  }
  return j;
}

std::string to_text(const ExperimentReport& report, Format format) {
  if (format == Format::csv) return to_csv(report);
  return to_json(report).dump(2) + "\n";
}

void emit(const ExperimentReport& report, Format format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << to_text(report, format);
  if (!report.dump_header.empty()) {
    const std::string dump_path = path + ".dump.csv";
    std::ofstream dump(dump_path, std::ios::binary);
    if (!dump) throw IoError("cannot open " + dump_path + " for writing");
    for (std::size_t k = 0; k < report.dump_header.size(); ++k) {
      dump << (k ? "," : "") << csv_field(report.dump_header[k]);
    }
    dump << "\r\n";
    for (const auto& row : report.dump_rows) {
      for (std::size_t k = 0; k < row.size(); ++k) dump << (k ? "," : "") << csv_field(row[k]);
      dump << "\r\n";
    }
    if (!dump) throw IoError("write failed for " + dump_path);
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace lebesgue

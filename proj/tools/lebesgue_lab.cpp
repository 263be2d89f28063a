// Command-line harness: one experiment per invocation, the full verification
// roll-up, and ensemble export.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lebesgue/errors.hpp"
#include "lebesgue/experiments.hpp"
#include "lebesgue/io.hpp"
#include "lebesgue/measures.hpp"
#include "lebesgue/parallel.hpp"
#include "lebesgue/report.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct RunFlags {
  std::string config_path;
  std::optional<std::string> experiment;
  std::optional<double> theta;
  std::optional<long long> n;
  std::optional<long long> samples;
  std::optional<unsigned long long> seed;
  std::optional<double> window;
  std::optional<double> lambda;
  std::optional<std::string> f;
  std::optional<std::string> format;
  std::optional<std::string> output;
  std::optional<unsigned> threads;
  bool quick = false;
  bool dump = false;
};

void write_or_print(const lebesgue::ExperimentReport& report, lebesgue::Format format, const std::string& output) {
  if (output.empty()) {
    std::cout << lebesgue::to_text(report, format);
  } else {
    lebesgue::emit(report, format, output);
  }
}

int run_command(const RunFlags& flags) {
  nlohmann::json j = flags.config_path.empty() ? nlohmann::json::object() : lebesgue::read_json_file(flags.config_path);
  if (!j.is_object()) throw lebesgue::ParameterError("config must be a JSON object");
  // Flags win over the config file.
  if (flags.experiment) j["experiment"] = *flags.experiment;
  if (flags.theta) j["theta"] = *flags.theta;
  if (flags.n) j["n"] = *flags.n;
  if (flags.samples) j["samples"] = *flags.samples;
  if (flags.seed) j["seed"] = *flags.seed;
  if (flags.window) j["window"] = *flags.window;
  if (flags.lambda) j["lambda"] = *flags.lambda;
  if (flags.f) {
    try {
      j["f"] = nlohmann::json::parse(*flags.f);
    } catch (const nlohmann::json::parse_error& e) {
      throw lebesgue::ParameterError(std::string("--f: ") + e.what());
    }
  }
  if (flags.format) j["format"] = *flags.format;
  if (flags.output) j["output"] = *flags.output;
  if (flags.threads) j["threads"] = *flags.threads;
  if (flags.quick) j["quick"] = true;
  if (flags.dump) j["dump"] = true;
  if (!j.contains("experiment")) throw lebesgue::ParameterError("--experiment is required");

  const lebesgue::ExperimentConfig config = lebesgue::ExperimentConfig::from_json(j);
  const lebesgue::ExperimentReport report = lebesgue::run(config);
  write_or_print(report, config.format, config.output);
  if (config.dump && config.output.empty() && !report.dump_header.empty()) {
    std::cerr << "note: --dump needs --output; raw samples not written\n";
  }
  std::fprintf(stderr, "%s: %s in %.2f s\n", config.experiment.c_str(), report.passed() ? "PASS" : "FAIL",
               report.wall_seconds);
  return report.passed() ? kExitPass : kExitFail;
}

int verify_command(unsigned long long seed, bool quick, unsigned threads, const std::string& format,
                   const std::string& output) {
  const lebesgue::Format fmt = lebesgue::parse_format(format);
  const lebesgue::ExperimentReport report = lebesgue::verify_all(
      seed, quick, threads, lebesgue::ToleranceTable::defaults(),
      [](int id, const lebesgue::CheckRow& row, double seconds) {
        std::fprintf(stderr, "criterion %2d  %s  %-32s %3.0f/%-3.0f  %.1f s\n", id, row.pass ? "PASS" : "FAIL",
                     lebesgue::criterion_title(id), row.estimate, row.tolerance, seconds);
      });
  write_or_print(report, fmt, output);
  std::fprintf(stderr, "verify: %s in %.1f s\n", report.passed() ? "PASS" : "FAIL", report.wall_seconds);
  return report.passed() ? kExitPass : kExitFail;
}

int ensemble_command(double theta, std::size_t samples, unsigned long long seed, double window, unsigned threads,
                     const std::string& output, std::string manifest) {
  if (!(theta > 0.0)) throw lebesgue::ParameterError("theta must be positive");
  if (samples == 0) throw lebesgue::ParameterError("samples must be positive");
  lebesgue::EnsembleOptions opt;
  opt.threads = lebesgue::resolve_threads(threads);
  const lebesgue::WeightedEnsemble ens =
      lebesgue::build_weighted_ensemble(lebesgue::RngStream(seed, 0), theta, samples, window, opt);
  lebesgue::write_ensemble_csv(ens, output);
  if (manifest.empty()) manifest = output + ".manifest.json";
  lebesgue::write_ensemble_manifest(ens, manifest);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and quadrature lab for Poisson-Dirichlet and multiplicative Lebesgue measures"};
  app.require_subcommand(1);

  RunFlags rf;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and emit its report");
  run->add_option("--config", rf.config_path, "JSON config; flags override its keys");
  run->add_option("--experiment", rf.experiment, "Experiment name");
  run->add_option("--theta", rf.theta, "Concentration parameter");
  run->add_option("--n", rf.n, "Dimension, size or class count (experiment specific)");
  run->add_option("--samples", rf.samples, "Monte Carlo sample count");
  run->add_option("--seed", rf.seed, "64-bit seed");
  run->add_option("--window", rf.window, "Window bound M on total mass");
  run->add_option("--lambda", rf.lambda, "Mellin-Barnes argument");
  run->add_option("--f", rf.f, R"(Step function as JSON {"masses":[...],"values":[...]})");
  run->add_option("--format", rf.format, "csv or json");
  run->add_option("--output", rf.output, "Report path (stdout when absent)");
  run->add_option("--threads", rf.threads, "Worker cap (default: LEBESGUE_THREADS, else 1)");
  run->add_flag("--quick", rf.quick, "Reduced sample sizes");
  run->add_flag("--dump", rf.dump, "Write raw samples next to the report");

  unsigned long long v_seed = 20240601;
  bool v_quick = false;
  unsigned v_threads = 0;
  std::string v_format = "csv", v_output;
  CLI::App* verify = app.add_subcommand("verify", "Run every acceptance criterion; one row per criterion");
  verify->add_option("--seed", v_seed, "64-bit seed");
  verify->add_flag("--quick", v_quick, "Reduced sample sizes");
  verify->add_option("--threads", v_threads, "Worker cap (default: LEBESGUE_THREADS, else 1)");
  verify->add_option("--format", v_format, "csv or json");
  verify->add_option("--output", v_output, "Report path (stdout when absent)");

  double e_theta = 1.0, e_window = 30.0;
  std::size_t e_samples = 1000;
  unsigned long long e_seed = 20240601;
  unsigned e_threads = 0;
  std::string e_output, e_manifest;
  CLI::App* ens = app.add_subcommand("ensemble", "Export a weighted gamma-process ensemble");
  ens->add_option("--theta", e_theta, "Concentration parameter");
  ens->add_option("--samples", e_samples, "Sample count");
  ens->add_option("--seed", e_seed, "64-bit seed");
  ens->add_option("--window", e_window, "Window bound M on total mass");
  ens->add_option("--threads", e_threads, "Worker cap");
  ens->add_option("--output", e_output, "Atom CSV path")->required();
  ens->add_option("--manifest", e_manifest, "Manifest path (default: <output>.manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return run_command(rf);
    if (*verify) return verify_command(v_seed, v_quick, v_threads, v_format, v_output);
    if (*ens) return ensemble_command(e_theta, e_samples, e_seed, e_window, e_threads, e_output, e_manifest);
  } catch (const lebesgue::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const lebesgue::DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}

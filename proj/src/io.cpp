#include "lebesgue/io.hpp"

#include <fstream>
#include <sstream>

#include "lebesgue/errors.hpp"
#include "lebesgue/report.hpp"

namespace lebesgue {

void write_ensemble_csv(const WeightedEnsemble& ens, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "sample_id,coeff,location\r\n";
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const DiscreteMeasure& m = ens.samples[i];
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      out << i << ',' << format_number(m.coeffs[k]) << ',' << format_number(m.locations[k]) << "\r\n";
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

nlohmann::ordered_json ensemble_manifest(const WeightedEnsemble& ens) {
  std::size_t atoms = 0;
  for (const auto& m : ens.samples) atoms += static_cast<std::size_t>(m.size());
  nlohmann::ordered_json j;
  j["theta"] = ens.theta;
  j["seed"] = ens.seed;
  j["window"] = ens.window;
  j["samples"] = ens.size();
  j["accepted"] = ens.accepted_count();
  j["rejected"] = ens.size() - ens.accepted_count();
  j["atoms"] = atoms;
  j["truncation_warnings"] = ens.truncation_warnings;
  return j;
}

void write_ensemble_manifest(const WeightedEnsemble& ens, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << ensemble_manifest(ens).dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

std::vector<DiscreteMeasure> read_ensemble_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header");
  std::vector<std::vector<double>> coeffs, locs;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw IoError(path + ": malformed row " + std::to_string(row));
    }
    std::size_t id = 0;
    double coeff = 0.0, loc = 0.0;
    try {
      id = std::stoul(a);
      coeff = std::stod(b);
      loc = std::stod(c);
    } catch (const std::exception&) {
      throw IoError(path + ": malformed row " + std::to_string(row));
    }
    if (id >= coeffs.size()) {
      coeffs.resize(id + 1);
      locs.resize(id + 1);
    }
    coeffs[id].push_back(coeff);
    locs[id].push_back(loc);
  }
  std::vector<DiscreteMeasure> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    out[i].coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs[i].data(), static_cast<Eigen::Index>(coeffs[i].size()));
    out[i].locations = Eigen::Map<const Eigen::VectorXd>(locs[i].data(), static_cast<Eigen::Index>(locs[i].size()));
  }
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(path + ": " + e.what());
  }
}

}  // namespace lebesgue

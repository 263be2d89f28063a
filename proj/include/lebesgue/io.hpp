#ifndef LEBESGUE_IO_HPP
#define LEBESGUE_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "lebesgue/measures.hpp"

namespace lebesgue {

/// One atom per row: sample_id,coeff,location.
void write_ensemble_csv(const WeightedEnsemble& ens, const std::string& path);

/// theta, seed, window and counts.
nlohmann::ordered_json ensemble_manifest(const WeightedEnsemble& ens);
void write_ensemble_manifest(const WeightedEnsemble& ens, const std::string& path);

/// Measures read back from write_ensemble_csv, indexed by sample_id.
std::vector<DiscreteMeasure> read_ensemble_csv(const std::string& path);

nlohmann::json read_json_file(const std::string& path);

}  // namespace lebesgue

#endif  // LEBESGUE_IO_HPP

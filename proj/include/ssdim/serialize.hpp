#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ssdim/experiment_runner.hpp"
#include "ssdim/hankel_stats.hpp"
#include "ssdim/spike_oracle.hpp"
#include "ssdim/state_space.hpp"
#include "ssdim/types.hpp"

namespace ssdim {

using nlohmann::json;

// Complex matrices serialize as nested arrays of [re, im] pairs.
json matrix_to_json(const MatrixXcd& m);
MatrixXcd matrix_from_json(const json& j);

/// {"type": "white"|"cosine"|"spectrum", "sigma2": ..., "lambda": [...]}
/// with M, L, N alongside.
json to_json(const NoiseModel& noise);
NoiseModel noise_from_json(const json& j, int M, int L, long N);

json to_json(const StateSpaceModel& model);
StateSpaceModel model_from_json(const json& j);

json to_json(const SpikeReport& report);
json to_json(const EmpiricalSpectrum& spec);
json to_json(const SupportAutocov& support);
json to_json(const SupportCca& support);
json to_json(const DeviationSummary& dev);

/// CSV with one eigenvalue per row (header "eigenvalue").
std::string spectrum_to_csv(const EmpiricalSpectrum& spec);

/// Sample-matrix CSV: a header row "M,L", then 2M rows by T columns, real
/// parts of the M series first, imaginary parts below.
void write_samples_csv(std::ostream& os, const MatrixXcd& samples, int L);
struct SamplesFile {
  MatrixXcd samples;
  int L = 1;
};
SamplesFile read_samples_csv(std::istream& is);

/// Experiment configuration from the documented JSON schema (see README).
ExperimentConfig config_from_json(const json& j);
ExperimentConfig load_config(const std::string& path);

/// Summary emitted next to table CSVs: config echo, per-grid oracle reports
/// and the frequency rows.
json table_summary_json(const ExperimentConfig& config, const TableResult& result);

void write_text_file(const std::string& path, const std::string& content);

} // namespace ssdim

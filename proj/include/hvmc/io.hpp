#pragma once

// Run-directory persistence: strict JSON experiment configs, checkpoints as
// a JSON manifest plus raw little-endian f64 segment files (bit-exact round
// trips), JSON-lines metrics and appendable inference results.

#include "hvmc/train.hpp"
#include "hvmc/wavefunction.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hvmc {

struct ExperimentConfig {
  CellVariant variant = CellVariant::euclidean_rnn;
  int hidden = 1;
  GeoConfig geo;
  bool phase_pi_scaling = false;
  Sublattice marshall = Sublattice::even;
  HeisenbergSpec system;
  TrainConfig train;
  std::string output_dir;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

WavefunctionModel make_model(const ExperimentConfig& cfg);

// Resolves a run directory against the HVMC_OUTPUT_ROOT environment variable
// when the configured path is relative.
std::filesystem::path resolve_output_dir(const std::string& configured);

struct Checkpoint {
  WavefunctionModel model;
  HeisenbergSpec system;
  int epoch = 0;
  double energy = 0.0;
  std::uint64_t seed = 0;
};

void save_checkpoint(const std::filesystem::path& dir, const WavefunctionModel& model,
                     const HeisenbergSpec& system, int epoch, double energy,
                     std::uint64_t seed);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

void append_metrics(const std::filesystem::path& file, const EpochRecord& rec);
std::vector<EpochRecord> read_metrics(const std::filesystem::path& file);
void append_timing(const std::filesystem::path& file, int epoch, double seconds);

struct EvalRecord {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

void append_result(const std::filesystem::path& file, const EvalRecord& rec);
std::vector<EvalRecord> read_results(const std::filesystem::path& file);

}  // namespace hvmc

// Copyright 2026 The ECTPI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic measurement campaign: forward-model impedances with relative
// Gaussian noise, the three estimators run over every plate, lift-off,
// frequency set and repeat, and per-cell relative error statistics.

#ifndef ECTPI_SYNTH_HARNESS_HPP_
#define ECTPI_SYNTH_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ectpi/estimators.hpp"
#include "ectpi/forward_model.hpp"
#include "ectpi/response_grid.hpp"

namespace ectpi {

struct PlateSpec {
  std::string name;
  double sigma = 0.0;      // S/m
  double thickness = 0.0;  // m
};

struct ExperimentConfig {
  ProbeGeometry probe = reference_probe();
  std::vector<PlateSpec> plates{{"a", 28.01e6, 1.98e-3},
                                {"b", 35.37e6, 1.04e-3},
                                {"c", 35.09e6, 1.97e-3},
                                {"d", 34.51e6, 2.93e-3},
                                {"e", 58.05e6, 0.99e-3}};
  std::vector<double> lift_offs{0.6e-3, 1.0e-3, 1.61e-3};
  std::vector<std::array<double, 2>> frequency_pairs{
      {800.0, 23200.0}, {1000.0, 23400.0}, {1200.0, 23600.0},
      {1400.0, 23800.0}, {1600.0, 24000.0}};
  double intermediate_frequency = 12000.0;
  int repeats = 10;
  // Standard deviation of each quadrature component relative to |dZ|.
  double noise_rel = 1e-3;
  std::uint64_t seed = 1;
  EstimatorOptions estimator;

  void validate() const;
};

// JSON keys mirror the fields; lengths in mm, conductivities in MS/m,
// frequencies in Hz. Missing keys keep their defaults; unknown keys are
// rejected.
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string to_json(const ExperimentConfig& cfg);

ProbeGeometry probe_from_json(const std::string& text);
ProbeGeometry load_probe(const std::string& path);

// Forward value plus independent N(0, (noise_rel |dZ|)^2) on each component.
Measurement synth_measurement(const ImpedanceModel& model, const PlateSpec& plate,
                              double lift_off, double frequency_hz,
                              double noise_rel, std::mt19937_64& rng,
                              std::string id = {});

// Independent RNG seed for one campaign cell.
std::uint64_t cell_seed(std::uint64_t master, std::size_t plate,
                        std::size_t lift_off, std::size_t freq_set,
                        std::size_t repeat);

double relative_error_pct(double estimate, double truth);

struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;  // N-1 divisor; 0 for fewer than two samples
  std::size_t n = 0;
};

ErrorStats error_stats(const std::vector<double>& errors_pct);

enum class CellStatus { kOk, kAmbiguous, kIncompatible, kFailed };

const char* to_string(CellStatus s);

struct EstimatorOutcome {
  CellStatus status = CellStatus::kOk;
  std::string message;
  std::vector<EstimatedQuantity> estimate;
  // Aligned with estimate. The first two entries are the estimated pair;
  // triplets append the pairwise-mean values after them.
  std::vector<double> errors_pct;
};

struct CellRecord {
  std::size_t plate = 0;
  std::size_t lift_off = 0;
  std::size_t freq_set = 0;
  std::size_t repeat = 0;
  // liftoff-invariant, sigma-invariant, thickness-invariant (three-frequency).
  std::array<EstimatorOutcome, 3> outcomes;
};

inline constexpr std::array<const char*, 3> kCampaignEstimators{
    "liftoff-invariant", "sigma-invariant", "thickness-invariant"};

struct TableRow {
  std::string estimator;
  std::string plate;
  double lift_off_mm = 0.0;
  std::string freq_set;
  std::string quantity;
  ErrorStats stats;
  std::size_t n_ok = 0;
  std::size_t n_ambiguous = 0;
};

struct CampaignResult {
  std::vector<CellRecord> cells;
  std::vector<TableRow> rows;
};

// OpenMP-parallel over cells; per-cell RNG streams make the result
// independent of the schedule and identical to run_campaign_serial.
CampaignResult run_campaign(const ExperimentConfig& cfg, const ResponseGrid& grid);
CampaignResult run_campaign_serial(const ExperimentConfig& cfg,
                                   const ResponseGrid& grid);

std::string freq_set_label(const ExperimentConfig& cfg, std::size_t k);

// One CSV per estimator and quantity, "<estimator>_<quantity>.csv", with
// columns plate, lift_off_mm, freq_set, quantity, mean_rel_err_pct,
// std_rel_err_pct, n_ok, n_ambiguous; plus raw.json and metadata.json.
void write_campaign(const CampaignResult& result, const ExperimentConfig& cfg,
                    const std::string& out_dir);

}  // namespace ectpi

#endif  // ECTPI_SYNTH_HARNESS_HPP_

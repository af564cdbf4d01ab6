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

// Estimators for pairs of plate parameters that are insensitive to the third
// (nuisance) parameter. Each measurement is turned into its compatibility
// curves; the curves are projected onto the plane that removes the nuisance
// coordinate and the estimate is their common point.
//
//   liftoff-invariant    (sigma, thickness)  pi2-pi3 mapped to sigma-thickness
//   sigma-invariant      (thickness, lift-off)  pi3-pi4
//   thickness-invariant  (sigma, lift-off)  pi2-pi4, or sigma-lift-off for
//                        several frequencies on one plate
//   single               one pi coordinate as an interval

#ifndef ECTPI_ESTIMATORS_HPP_
#define ECTPI_ESTIMATORS_HPP_

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ectpi/curves.hpp"
#include "ectpi/response_grid.hpp"

namespace ectpi {

struct Measurement {
  std::string id;
  double frequency_hz = 0.0;
  std::complex<double> delta_z;  // ohm
  std::string group;

  void validate() const;
};

struct EstimatorOptions {
  // Acceptance tolerance in normalised units for noiseless data.
  double tol = 1e-3;
  // Relative measurement noise; widens the tolerance to
  // max(tol, noise_tol_gain * noise_rel).
  double noise_rel = 0.0;
  double noise_tol_gain = 3.0;
  // Intersections crossing at less than this angle (radians) are flagged.
  double min_angle = 5.0 * 3.14159265358979323846 / 180.0;
  LevelFunctions level = LevelFunctions::kReIm;
  TraceOptions trace;
  SeedOptions seeds;

  double effective_tol() const;
};

// A measurement with its dimensionless response and traced curves.
struct TracedMeasurement {
  Measurement measurement;
  double omega = 0.0;
  std::complex<double> pi1;
  std::vector<Polyline3> curves;
};

TracedMeasurement trace_measurement(const Measurement& m, const ResponseGrid& grid,
                                    const EstimatorOptions& options = {});

enum class ThicknessInvariantMode { kThicknessVaried, kThreeFrequency };

const char* to_string(ThicknessInvariantMode mode);

struct EstimatedQuantity {
  std::string name;  // "sigma", "thickness", "lift_off", "pi2", ...
  double value = 0.0;
  std::string unit;  // "S/m", "m" or "1"
};

struct EstimationResult {
  std::string method;
  std::vector<EstimatedQuantity> quantities;
  std::string plane;
  std::size_t candidates = 0;
  double max_distance = 0.0;
  double tolerance = 0.0;
  // Smallest crossing angle among the intersections used, radians.
  double min_crossing_angle = 0.0;
  bool ill_conditioned = false;
  std::vector<std::string> measurement_ids;
  // Three-frequency mode: mean of the pairwise intersections.
  std::vector<EstimatedQuantity> pairwise_mean;
  // Single-axis mode: common region(s) in pi units.
  std::vector<Interval> region;
  double region_width = 0.0;

  double value(const std::string& name) const;
  bool has(const std::string& name) const;
};

std::string to_json(const EstimationResult& r);

EstimationResult estimate_conductivity_thickness(
    const std::vector<Measurement>& ms, const ResponseGrid& grid,
    const EstimatorOptions& options = {});
EstimationResult estimate_conductivity_thickness(
    const std::vector<TracedMeasurement>& ms, const ResponseGrid& grid,
    const EstimatorOptions& options = {});

EstimationResult estimate_thickness_liftoff(const std::vector<Measurement>& ms,
                                            const ResponseGrid& grid,
                                            const EstimatorOptions& options = {});
EstimationResult estimate_thickness_liftoff(
    const std::vector<TracedMeasurement>& ms, const ResponseGrid& grid,
    const EstimatorOptions& options = {});

EstimationResult estimate_conductivity_liftoff(
    const std::vector<Measurement>& ms, const ResponseGrid& grid,
    ThicknessInvariantMode mode, const EstimatorOptions& options = {});
EstimationResult estimate_conductivity_liftoff(
    const std::vector<TracedMeasurement>& ms, const ResponseGrid& grid,
    ThicknessInvariantMode mode, const EstimatorOptions& options = {});

// pi_index in {2, 3, 4}. For pi2 all measurements must share a frequency so
// the interval maps to a conductivity.
EstimationResult estimate_single(const std::vector<Measurement>& ms,
                                 const ResponseGrid& grid, int pi_index,
                                 const EstimatorOptions& options = {});
EstimationResult estimate_single(const std::vector<TracedMeasurement>& ms,
                                 const ResponseGrid& grid, int pi_index,
                                 const EstimatorOptions& options = {});

// Normalising scales for the dimensional planes: sigma spans the grid pi2
// range at the highest frequency used; lengths span the pi range times D.
PlaneScale sigma_thickness_scale(const ResponseGrid& grid, double omega_max);
PlaneScale sigma_liftoff_scale(const ResponseGrid& grid, double omega_max);

}  // namespace ectpi

#endif  // ECTPI_ESTIMATORS_HPP_

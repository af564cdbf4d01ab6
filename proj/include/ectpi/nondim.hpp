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

// Buckingham pi-group algebra for a single absolute coil above a plate.
//
//   pi1 = dZ / (mu0 N^2 omega D)   (complex response)
//   pi2 = D / delta,  delta = sqrt(2 / (omega mu0 sigma))
//   pi3 = dh / D
//   pi4 = lo / D
//
// D is always the outer coil radius.

#ifndef ECTPI_NONDIM_HPP_
#define ECTPI_NONDIM_HPP_

#include <complex>
#include <numbers>

namespace ectpi {

inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;  // H/m

inline double angular_frequency(double f_hz) {
  return 2.0 * std::numbers::pi * f_hz;
}

// A point of the parameter space (0,inf) x (0,inf) x [0,inf).
struct PiPoint {
  double pi2 = 0.0;
  double pi3 = 0.0;
  double pi4 = 0.0;

  bool operator==(const PiPoint&) const = default;
};

struct PhysicalTriple {
  double sigma = 0.0;      // S/m
  double thickness = 0.0;  // m
  double lift_off = 0.0;   // m
};

struct DimensionlessResponse {
  std::complex<double> pi1;
};

double skin_depth(double omega, double sigma);

PiPoint pi_from_physical(double omega, double sigma, double thickness,
                         double lift_off, double characteristic_length);

double sigma_from_pi2(double pi2, double omega, double characteristic_length);

// Angular frequency that realises pi2 for a given conductivity.
double omega_from_pi2(double pi2, double sigma, double characteristic_length);

PhysicalTriple physical_from_pi(const PiPoint& p, double omega,
                                double characteristic_length);

DimensionlessResponse nondimensionalize(std::complex<double> delta_z,
                                        double omega,
                                        double characteristic_length,
                                        double turns);

std::complex<double> redimensionalize(const DimensionlessResponse& r,
                                      double omega,
                                      double characteristic_length,
                                      double turns);

}  // namespace ectpi

#endif  // ECTPI_NONDIM_HPP_

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

#include "ectpi/nondim.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "ectpi/error.hpp"

namespace ectpi {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << name << " must be positive and finite, got " << v;
    throw DomainError(msg.str());
  }
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << name << " must be non-negative and finite, got " << v;
    throw DomainError(msg.str());
  }
}

}  // namespace

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kDomain: return "domain";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kData: return "data";
    case ErrorCategory::kAmbiguity: return "ambiguity";
    case ErrorCategory::kModel: return "model";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kFormat: return "format";
  }
  return "unknown";
}

double skin_depth(double omega, double sigma) {
  require_positive(omega, "angular frequency");
  require_positive(sigma, "conductivity");
  return std::sqrt(2.0 / (omega * kMu0 * sigma));
}

PiPoint pi_from_physical(double omega, double sigma, double thickness,
                         double lift_off, double characteristic_length) {
  require_positive(characteristic_length, "characteristic length");
  require_positive(thickness, "thickness");
  require_non_negative(lift_off, "lift-off");
  return {characteristic_length / skin_depth(omega, sigma),
          thickness / characteristic_length, lift_off / characteristic_length};
}

double sigma_from_pi2(double pi2, double omega, double characteristic_length) {
  require_positive(pi2, "pi2");
  require_positive(omega, "angular frequency");
  require_positive(characteristic_length, "characteristic length");
  return 2.0 * pi2 * pi2 /
         (kMu0 * omega * characteristic_length * characteristic_length);
}

double omega_from_pi2(double pi2, double sigma, double characteristic_length) {
  require_positive(pi2, "pi2");
  require_positive(sigma, "conductivity");
  require_positive(characteristic_length, "characteristic length");
  return 2.0 * pi2 * pi2 /
         (kMu0 * sigma * characteristic_length * characteristic_length);
}

PhysicalTriple physical_from_pi(const PiPoint& p, double omega,
                                double characteristic_length) {
  require_non_negative(p.pi4, "pi4");
  require_positive(p.pi3, "pi3");
  return {sigma_from_pi2(p.pi2, omega, characteristic_length),
          p.pi3 * characteristic_length, p.pi4 * characteristic_length};
}

DimensionlessResponse nondimensionalize(std::complex<double> delta_z,
                                        double omega,
                                        double characteristic_length,
                                        double turns) {
  require_positive(omega, "angular frequency");
  require_positive(characteristic_length, "characteristic length");
  if (!(turns >= 1.0)) throw DomainError("number of turns must be >= 1");
  const double scale = kMu0 * turns * turns * omega * characteristic_length;
  return {delta_z / scale};
}

std::complex<double> redimensionalize(const DimensionlessResponse& r,
                                      double omega,
                                      double characteristic_length,
                                      double turns) {
  require_positive(omega, "angular frequency");
  require_positive(characteristic_length, "characteristic length");
  if (!(turns >= 1.0)) throw DomainError("number of turns must be >= 1");
  const double scale = kMu0 * turns * turns * omega * characteristic_length;
  return r.pi1 * scale;
}

}  // namespace ectpi

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

// Dodd-Deeds impedance change of an air-cored rectangular-section coil above
// a single non-magnetic conductive layer:
//
//   dZ = j w pi mu0 N^2 / (hc^2 (re - ri)^2)
//        * int_0^inf chi(k ri, k re)^2 k^-6 (e^{-k lo} - e^{-k (lo + hc)})^2
//          Gamma(k) dk
//
// with chi(a, b) = int_a^b x J1(x) dx and Gamma the layer reflection term.

#ifndef ECTPI_FORWARD_MODEL_HPP_
#define ECTPI_FORWARD_MODEL_HPP_

#include <complex>
#include <cstddef>
#include <vector>

#include "ectpi/quadrature.hpp"

namespace ectpi {

struct ProbeGeometry {
  double inner_radius = 0.0;  // m
  double outer_radius = 0.0;  // m
  double height = 0.0;        // m
  double turns = 1.0;
  double tilt = 0.0;  // rad; only 0 is modelled

  double characteristic_length() const { return outer_radius; }
  double shape_radius() const { return inner_radius / outer_radius; }
  double shape_height() const { return height / outer_radius; }

  // Throws DomainError when the invariants do not hold.
  void validate() const;

  bool operator==(const ProbeGeometry&) const = default;
};

// The absolute coil of the reference experimental set-up.
ProbeGeometry reference_probe();

struct PlateParameters {
  double sigma = 0.0;      // S/m
  double thickness = 0.0;  // m
};

struct OperatingPoint {
  double omega = 0.0;     // rad/s
  double lift_off = 0.0;  // m
};

// int_a^b x J1(x) dx to ~1e-12 relative accuracy. Requires 0 <= a <= b.
double coil_window_integral(double a, double b);

// Bessel J1; thin wrapper so every caller shares one implementation.
double bessel_j1(double x);

std::complex<double> plate_reflection_coefficient(double kappa,
                                                  const PlateParameters& plate,
                                                  const OperatingPoint& op);

// Tabulated coil window w(u) = chi(u t, u) / u^3, t = ri/re, for u = kappa re.
// Piecewise Chebyshev interpolation of directly integrated chi values on
// [0, table_limit]; beyond the table w is integrated on demand.
class CoilWindow {
 public:
  static constexpr double kPanelWidth = 2.0;
  static constexpr int kPanelNodes = 16;
  static constexpr double kDefaultTableLimit = 640.0;

  explicit CoilWindow(double radius_ratio,
                      double table_limit = kDefaultTableLimit);

  double operator()(double u) const;
  double direct(double u) const;

  double radius_ratio() const { return radius_ratio_; }
  double table_limit() const { return table_limit_; }

 private:
  double radius_ratio_;
  double table_limit_;
  std::size_t panels_;
  std::vector<double> coeffs_;  // panels_ x kPanelNodes Chebyshev coefficients
};

struct ImpedanceResult {
  std::complex<double> delta_z;  // ohm
  double error_estimate = 0.0;   // ohm, absolute
  std::size_t evaluations = 0;
  double kappa_max = 0.0;        // 1/m, truncation point of the integral
};

struct ForwardOptions {
  double rel_tol = 1e-8;
  // Truncate where the integrand envelope drops below this fraction of its
  // peak.
  double truncation = 1e-14;
};

// Forward model bound to one probe. Construction tabulates the coil window
// (a few hundred thousand Bessel evaluations); evaluation is then cheap and
// thread-safe.
class ImpedanceModel {
 public:
  explicit ImpedanceModel(const ProbeGeometry& probe,
                          ForwardOptions options = {});

  const ProbeGeometry& probe() const { return probe_; }
  const ForwardOptions& options() const { return options_; }
  const CoilWindow& window() const { return window_; }

  ImpedanceResult evaluate(const PlateParameters& plate,
                           const OperatingPoint& op) const;
  ImpedanceResult evaluate(const PlateParameters& plate,
                           const OperatingPoint& op,
                           const quadrature::Options& quad) const;

  std::complex<double> delta_impedance(const PlateParameters& plate,
                                       const OperatingPoint& op) const {
    return evaluate(plate, op).delta_z;
  }

  // Dimensionless truncation point u_max = kappa_max * re for a lift-off.
  double truncation_point(double lift_off) const;

 private:
  ProbeGeometry probe_;
  ForwardOptions options_;
  CoilWindow window_;
};

// One-shot convenience; builds the window table on every call.
std::complex<double> delta_impedance(const ProbeGeometry& probe,
                                     const PlateParameters& plate,
                                     const OperatingPoint& op);

}  // namespace ectpi

#endif  // ECTPI_FORWARD_MODEL_HPP_

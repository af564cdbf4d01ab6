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

// Precomputed dimensionless response F(pi2, pi3, pi4) on a tensor grid with
// a C1 tricubic interpolant and its analytic gradient.

#ifndef ECTPI_RESPONSE_GRID_HPP_
#define ECTPI_RESPONSE_GRID_HPP_

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ectpi/forward_model.hpp"
#include "ectpi/nondim.hpp"

namespace ectpi {

enum class AxisSpacing { kLinear, kLog };

const char* to_string(AxisSpacing spacing);
AxisSpacing axis_spacing_from_string(const std::string& name);

struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  AxisSpacing spacing = AxisSpacing::kLinear;

  std::vector<double> nodes() const;
};

struct GridSpec {
  AxisSpec pi2{0.8, 22.0, 64, AxisSpacing::kLog};
  AxisSpec pi3{0.01, 0.6, 48, AxisSpacing::kLog};
  AxisSpec pi4{0.03, 0.4, 40, AxisSpacing::kLinear};
  double reference_sigma = 35e6;  // S/m, used to realise each node physically
};

struct GridBuildInfo {
  double reference_sigma = 35e6;
  double forward_rel_tol = 1e-8;
  std::array<AxisSpacing, 3> spacing{AxisSpacing::kLog, AxisSpacing::kLog,
                                     AxisSpacing::kLinear};
  std::uint32_t format_version = 1;

  bool operator==(const GridBuildInfo&) const = default;
};

// Physical sweep a spec implies for one probe at the reference conductivity.
struct PhysicalSweep {
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
  double thickness_min = 0.0;
  double thickness_max = 0.0;
  double lift_off_min = 0.0;
  double lift_off_max = 0.0;
};

PhysicalSweep physical_sweep(const ProbeGeometry& probe, const GridSpec& spec);

struct ResponseSample {
  std::complex<double> value;
  std::array<double, 3> grad_re{};  // d Re F / d (pi2, pi3, pi4)
  std::array<double, 3> grad_im{};
};

struct GradientPair {
  std::array<double, 3> re{};
  std::array<double, 3> im{};
};

class ResponseGrid {
 public:
  using Axes = std::array<std::vector<double>, 3>;

  ResponseGrid() = default;
  ResponseGrid(ProbeGeometry probe, Axes axes,
               std::vector<std::complex<double>> values, GridBuildInfo info);

  const ProbeGeometry& probe() const { return probe_; }
  const GridBuildInfo& info() const { return info_; }
  const std::vector<double>& axis(int dim) const { return axes_[dim]; }
  const Axes& axes() const { return axes_; }
  std::size_t size(int dim) const { return axes_[dim].size(); }
  std::size_t node_count() const { return values_.size(); }
  const std::vector<std::complex<double>>& values() const { return values_; }

  // pi4 index runs fastest, then pi3, then pi2.
  std::size_t flat_index(std::size_t i2, std::size_t i3, std::size_t i4) const {
    return (i2 * axes_[1].size() + i3) * axes_[2].size() + i4;
  }
  const std::complex<double>& value(std::size_t i2, std::size_t i3,
                                    std::size_t i4) const {
    return values_[flat_index(i2, i3, i4)];
  }
  PiPoint node(std::size_t i2, std::size_t i3, std::size_t i4) const {
    return {axes_[0][i2], axes_[1][i3], axes_[2][i4]};
  }

  PiPoint lower() const { return node(0, 0, 0); }
  PiPoint upper() const {
    return node(axes_[0].size() - 1, axes_[1].size() - 1, axes_[2].size() - 1);
  }
  bool contains(const PiPoint& p) const;

  // Maps a point to axis-normalised coordinates (each axis onto [0, 1]).
  std::array<double, 3> normalize(const PiPoint& p) const;
  PiPoint denormalize(const std::array<double, 3>& x) const;
  std::array<double, 3> spans() const;

  // Throws DomainError naming the violated axis outside the closed box.
  std::complex<double> interpolate(const PiPoint& p) const;

  // Value and gradient on the closed box.
  ResponseSample sample(const PiPoint& p) const;

  // Gradient of the interpolant; boundary points are rejected.
  GradientPair gradient(const PiPoint& p) const;

  bool operator==(const ResponseGrid&) const = default;

 private:
  void check_inside(const PiPoint& p) const;

  ProbeGeometry probe_;
  Axes axes_;
  std::vector<std::complex<double>> values_;
  GridBuildInfo info_;
};

struct BuildOptions {
  ForwardOptions forward;
  // Called with the number of nodes finished; may be invoked from any thread.
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// OpenMP-parallel over nodes. Bit-identical to build_grid_serial.
ResponseGrid build_grid(const ImpedanceModel& model, const GridSpec& spec,
                        const BuildOptions& options = {});
ResponseGrid build_grid_serial(const ImpedanceModel& model, const GridSpec& spec,
                               const BuildOptions& options = {});

// Value stored at a node: the forward model evaluated at the physical
// configuration realising the node's pi triple with the reference conductivity.
std::complex<double> node_response(const ImpedanceModel& model,
                                   const PiPoint& p, double reference_sigma);

}  // namespace ectpi

#endif  // ECTPI_RESPONSE_GRID_HPP_

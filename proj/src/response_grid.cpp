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

#include "ectpi/response_grid.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ectpi/error.hpp"

namespace ectpi {

namespace {

constexpr const char* kAxisNames[3] = {"pi2", "pi3", "pi4"};

// Weights of the 1D cubic Hermite interpolant over at most four consecutive
// nodes starting at `base`. Node slopes come from three-point differences
// (exact for quadratics), so the scheme reproduces quadratics.
struct Stencil {
  std::size_t base = 0;
  int count = 0;
  double w[4] = {0.0, 0.0, 0.0, 0.0};
  double dw[4] = {0.0, 0.0, 0.0, 0.0};
};

// Slope at node j as weights on nodes (j0, j0 + 1, j0 + 2).
void slope_weights(const std::vector<double>& x, std::size_t j, std::size_t& j0,
                   double c[3]) {
  const std::size_t n = x.size();
  if (n == 2) {
    j0 = 0;
    const double h = x[1] - x[0];
    c[0] = -1.0 / h;
    c[1] = 1.0 / h;
    c[2] = 0.0;
    return;
  }
  if (j == 0) {
    j0 = 0;
    const double h1 = x[1] - x[0];
    const double h2 = x[2] - x[1];
    c[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
    c[1] = (h1 + h2) / (h1 * h2);
    c[2] = -h1 / (h2 * (h1 + h2));
  } else if (j == n - 1) {
    j0 = n - 3;
    const double h1 = x[n - 2] - x[n - 3];
    const double h2 = x[n - 1] - x[n - 2];
    c[0] = h2 / (h1 * (h1 + h2));
    c[1] = -(h1 + h2) / (h1 * h2);
    c[2] = (h1 + 2.0 * h2) / (h2 * (h1 + h2));
  } else {
    j0 = j - 1;
    const double hm = x[j] - x[j - 1];
    const double hp = x[j + 1] - x[j];
    c[0] = -hp / (hm * (hm + hp));
    c[1] = (hp - hm) / (hm * hp);
    c[2] = hm / (hp * (hm + hp));
  }
}

Stencil make_stencil(const std::vector<double>& x, double v) {
  const std::size_t n = x.size();
  auto it = std::upper_bound(x.begin(), x.end(), v);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  i = std::min(i, n - 2);

  Stencil s;
  s.count = static_cast<int>(std::min<std::size_t>(4, n));
  s.base = std::min(i == 0 ? 0 : i - 1, n - static_cast<std::size_t>(s.count));

  const double h = x[i + 1] - x[i];
  const double t = (v - x[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  const double d00 = (6.0 * t2 - 6.0 * t) / h;
  const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double d01 = (-6.0 * t2 + 6.0 * t) / h;
  const double d11 = 3.0 * t2 - 2.0 * t;

  s.w[i - s.base] += h00;
  s.w[i + 1 - s.base] += h01;
  s.dw[i - s.base] += d00;
  s.dw[i + 1 - s.base] += d01;

  std::size_t j0 = 0;
  double c[3];
  slope_weights(x, i, j0, c);
  for (int k = 0; k < 3; ++k) {
    if (c[k] == 0.0) continue;
    s.w[j0 + k - s.base] += h10 * h * c[k];
    s.dw[j0 + k - s.base] += d10 * c[k];
  }
  slope_weights(x, i + 1, j0, c);
  for (int k = 0; k < 3; ++k) {
    if (c[k] == 0.0) continue;
    s.w[j0 + k - s.base] += h11 * h * c[k];
    s.dw[j0 + k - s.base] += d11 * c[k];
  }
  return s;
}

void validate_axis(const std::vector<double>& a, int dim) {
  if (a.size() < 2) {
    std::ostringstream msg;
    msg << kAxisNames[dim] << " axis needs at least two nodes";
    throw DomainError(msg.str());
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || (i > 0 && !(a[i] > a[i - 1]))) {
      std::ostringstream msg;
      msg << kAxisNames[dim] << " axis must be finite and strictly increasing";
      throw DomainError(msg.str());
    }
  }
}

}  // namespace

const char* to_string(AxisSpacing spacing) {
  return spacing == AxisSpacing::kLog ? "log" : "linear";
}

AxisSpacing axis_spacing_from_string(const std::string& name) {
  if (name == "log") return AxisSpacing::kLog;
  if (name == "linear") return AxisSpacing::kLinear;
  throw ConfigError("unknown axis spacing '" + name + "'");
}

std::vector<double> AxisSpec::nodes() const {
  if (n < 2) throw DomainError("axis needs at least two nodes");
  if (!(hi > lo)) throw DomainError("axis upper bound must exceed lower bound");
  if (spacing == AxisSpacing::kLog && !(lo > 0.0)) {
    throw DomainError("log-spaced axis needs a positive lower bound");
  }
  std::vector<double> out(n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / last;
    out[i] = spacing == AxisSpacing::kLog
                 ? lo * std::exp(t * std::log(hi / lo))
                 : lo + t * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

PhysicalSweep physical_sweep(const ProbeGeometry& probe, const GridSpec& spec) {
  const double d = probe.characteristic_length();
  auto hz = [&](double pi2) {
    return omega_from_pi2(pi2, spec.reference_sigma, d) / (2.0 * std::numbers::pi);
  };
  return {hz(spec.pi2.lo),  hz(spec.pi2.hi),  spec.pi3.lo * d,
          spec.pi3.hi * d,  spec.pi4.lo * d,  spec.pi4.hi * d};
}

ResponseGrid::ResponseGrid(ProbeGeometry probe, Axes axes,
                           std::vector<std::complex<double>> values,
                           GridBuildInfo info)
    : probe_(probe),
      axes_(std::move(axes)),
      values_(std::move(values)),
      info_(info) {
  for (int d = 0; d < 3; ++d) validate_axis(axes_[d], d);
  if (values_.size() != axes_[0].size() * axes_[1].size() * axes_[2].size()) {
    throw DomainError("response grid value count does not match its axes");
  }
}

bool ResponseGrid::contains(const PiPoint& p) const {
  const double v[3] = {p.pi2, p.pi3, p.pi4};
  for (int d = 0; d < 3; ++d) {
    if (!(v[d] >= axes_[d].front() && v[d] <= axes_[d].back())) return false;
  }
  return true;
}

void ResponseGrid::check_inside(const PiPoint& p) const {
  const double v[3] = {p.pi2, p.pi3, p.pi4};
  for (int d = 0; d < 3; ++d) {
    if (!(v[d] >= axes_[d].front() && v[d] <= axes_[d].back())) {
      std::ostringstream msg;
      msg << kAxisNames[d] << " = " << v[d] << " lies outside the database range ["
          << axes_[d].front() << ", " << axes_[d].back() << "]";
      throw DomainError(msg.str());
    }
  }
}

std::array<double, 3> ResponseGrid::spans() const {
  return {axes_[0].back() - axes_[0].front(), axes_[1].back() - axes_[1].front(),
          axes_[2].back() - axes_[2].front()};
}

std::array<double, 3> ResponseGrid::normalize(const PiPoint& p) const {
  const auto s = spans();
  return {(p.pi2 - axes_[0].front()) / s[0], (p.pi3 - axes_[1].front()) / s[1],
          (p.pi4 - axes_[2].front()) / s[2]};
}

PiPoint ResponseGrid::denormalize(const std::array<double, 3>& x) const {
  const auto s = spans();
  return {axes_[0].front() + x[0] * s[0], axes_[1].front() + x[1] * s[1],
          axes_[2].front() + x[2] * s[2]};
}

std::complex<double> ResponseGrid::interpolate(const PiPoint& p) const {
  check_inside(p);
  const Stencil s2 = make_stencil(axes_[0], p.pi2);
  const Stencil s3 = make_stencil(axes_[1], p.pi3);
  const Stencil s4 = make_stencil(axes_[2], p.pi4);
  double re = 0.0;
  double im = 0.0;
  for (int a = 0; a < s2.count; ++a) {
    if (s2.w[a] == 0.0) continue;
    for (int b = 0; b < s3.count; ++b) {
      const double wab = s2.w[a] * s3.w[b];
      if (wab == 0.0) continue;
      const std::size_t row = flat_index(s2.base + a, s3.base + b, s4.base);
      for (int c = 0; c < s4.count; ++c) {
        const double w = wab * s4.w[c];
        re += w * values_[row + c].real();
        im += w * values_[row + c].imag();
      }
    }
  }
  return {re, im};
}

ResponseSample ResponseGrid::sample(const PiPoint& p) const {
  check_inside(p);
  const Stencil s2 = make_stencil(axes_[0], p.pi2);
  const Stencil s3 = make_stencil(axes_[1], p.pi3);
  const Stencil s4 = make_stencil(axes_[2], p.pi4);
  ResponseSample out;
  double re = 0.0;
  double im = 0.0;
  for (int a = 0; a < s2.count; ++a) {
    for (int b = 0; b < s3.count; ++b) {
      const std::size_t row = flat_index(s2.base + a, s3.base + b, s4.base);
      for (int c = 0; c < s4.count; ++c) {
        const double vr = values_[row + c].real();
        const double vi = values_[row + c].imag();
        const double w = s2.w[a] * s3.w[b] * s4.w[c];
        const double g2 = s2.dw[a] * s3.w[b] * s4.w[c];
        const double g3 = s2.w[a] * s3.dw[b] * s4.w[c];
        const double g4 = s2.w[a] * s3.w[b] * s4.dw[c];
        re += w * vr;
        im += w * vi;
        out.grad_re[0] += g2 * vr;
        out.grad_re[1] += g3 * vr;
        out.grad_re[2] += g4 * vr;
        out.grad_im[0] += g2 * vi;
        out.grad_im[1] += g3 * vi;
        out.grad_im[2] += g4 * vi;
      }
    }
  }
  out.value = {re, im};
  return out;
}

GradientPair ResponseGrid::gradient(const PiPoint& p) const {
  const double v[3] = {p.pi2, p.pi3, p.pi4};
  for (int d = 0; d < 3; ++d) {
    if (!(v[d] > axes_[d].front() && v[d] < axes_[d].back())) {
      std::ostringstream msg;
      msg << "gradient needs a strictly interior point; " << kAxisNames[d]
          << " = " << v[d] << " is not inside (" << axes_[d].front() << ", "
          << axes_[d].back() << ")";
      throw DomainError(msg.str());
    }
  }
  const auto s = sample(p);
  return {s.grad_re, s.grad_im};
}

std::complex<double> node_response(const ImpedanceModel& model, const PiPoint& p,
                                   double reference_sigma) {
  const auto& probe = model.probe();
  const double d = probe.characteristic_length();
  const double omega = omega_from_pi2(p.pi2, reference_sigma, d);
  const PlateParameters plate{reference_sigma, p.pi3 * d};
  const OperatingPoint op{omega, p.pi4 * d};
  return nondimensionalize(model.delta_impedance(plate, op), omega, d,
                           probe.turns)
      .pi1;
}

namespace {

struct Layout {
  ResponseGrid::Axes axes;
  std::size_t n3 = 0;
  std::size_t n4 = 0;
  std::size_t total = 0;

  PiPoint point(std::size_t flat) const {
    const std::size_t i4 = flat % n4;
    const std::size_t i3 = (flat / n4) % n3;
    const std::size_t i2 = flat / (n3 * n4);
    return {axes[0][i2], axes[1][i3], axes[2][i4]};
  }
};

Layout make_layout(const GridSpec& spec) {
  Layout l;
  l.axes = {spec.pi2.nodes(), spec.pi3.nodes(), spec.pi4.nodes()};
  l.n3 = l.axes[1].size();
  l.n4 = l.axes[2].size();
  l.total = l.axes[0].size() * l.n3 * l.n4;
  if (!(spec.reference_sigma > 0.0)) {
    throw DomainError("reference conductivity must be positive");
  }
  return l;
}

[[noreturn]] void rethrow_node_failure(const Layout& l, std::size_t flat,
                                       const std::string& what) {
  const PiPoint p = l.point(flat);
  std::ostringstream msg;
  msg << "forward model failed at node " << flat << " (pi2 = " << p.pi2
      << ", pi3 = " << p.pi3 << ", pi4 = " << p.pi4 << "): " << what;
  throw Error(ErrorCategory::kModel, msg.str());
}

GridBuildInfo make_info(const ImpedanceModel& model, const GridSpec& spec) {
  GridBuildInfo info;
  info.reference_sigma = spec.reference_sigma;
  info.forward_rel_tol = model.options().rel_tol;
  info.spacing = {spec.pi2.spacing, spec.pi3.spacing, spec.pi4.spacing};
  return info;
}

}  // namespace

ResponseGrid build_grid_serial(const ImpedanceModel& model, const GridSpec& spec,
                               const BuildOptions& options) {
  const Layout l = make_layout(spec);
  std::vector<std::complex<double>> values(l.total);
  for (std::size_t k = 0; k < l.total; ++k) {
    try {
      values[k] = node_response(model, l.point(k), spec.reference_sigma);
    } catch (const std::exception& e) {
      rethrow_node_failure(l, k, e.what());
    }
    if (options.progress) options.progress(k + 1, l.total);
  }
  return ResponseGrid(model.probe(), l.axes, std::move(values),
                      make_info(model, spec));
}

ResponseGrid build_grid(const ImpedanceModel& model, const GridSpec& spec,
                        const BuildOptions& options) {
  const Layout l = make_layout(spec);
  std::vector<std::complex<double>> values(l.total);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t failed = kNone;
  std::string failure;
  std::atomic<std::size_t> done{0};
  const auto total = static_cast<std::ptrdiff_t>(l.total);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      values[idx] = node_response(model, l.point(idx), spec.reference_sigma);
    } catch (const std::exception& e) {
#pragma omp critical(ectpi_build_failure)
      {
        if (idx < failed) {
          failed = idx;
          failure = e.what();
        }
      }
    }
    if (options.progress) options.progress(++done, l.total);
  }
  if (failed != kNone) rethrow_node_failure(l, failed, failure);
  return ResponseGrid(model.probe(), l.axes, std::move(values),
                      make_info(model, spec));
}

}  // namespace ectpi

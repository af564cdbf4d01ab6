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

#include "ectpi/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "ectpi/error.hpp"
#include "ectpi/nondim.hpp"

namespace ectpi {

namespace {

using BesselPolicy =
    boost::math::policies::policy<boost::math::policies::promote_double<false>>;

using cplx = std::complex<double>;

// exp(z) - 1 without cancellation for small |z|.
cplx expm1(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

// Majorant of |chi(u t, u)| / u^3 used only to place the truncation point.
double window_envelope(double u, double t) {
  const double small = (1.0 - t * t * t) / 6.0;
  if (u <= 1.0) return small;
  const double large =
      (0.8 * (std::sqrt(u) + std::sqrt(u * t)) + 3.0) / (u * u * u);
  return std::min(small, large);
}

}  // namespace

void ProbeGeometry::validate() const {
  if (!(inner_radius > 0.0) || !(outer_radius > inner_radius)) {
    std::ostringstream msg;
    msg << "probe radii must satisfy 0 < ri < re (ri = " << inner_radius
        << ", re = " << outer_radius << ")";
    throw DomainError(msg.str());
  }
  if (!(height > 0.0)) throw DomainError("probe height must be positive");
  if (!(turns >= 1.0)) throw DomainError("probe must have at least one turn");
  if (!std::isfinite(tilt)) throw DomainError("probe tilt must be finite");
}

ProbeGeometry reference_probe() {
  return {6.75e-3, 7.75e-3, 4.05e-3, 117.0, 0.0};
}

double bessel_j1(double x) {
  return boost::math::cyl_bessel_j(1, x, BesselPolicy());
}

double coil_window_integral(double a, double b) {
  if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b)) {
    std::ostringstream msg;
    msg << "coil window integral needs 0 <= a <= b (a = " << a << ", b = " << b
        << ")";
    throw DomainError(msg.str());
  }
  if (a == b) return 0.0;
  const double span = b - a;
  const auto panels =
      static_cast<std::size_t>(std::ceil(span / CoilWindow::kPanelWidth));
  std::vector<double> breaks(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i) {
    breaks[i] = a + span * static_cast<double>(i) / static_cast<double>(panels);
  }
  breaks.back() = b;
  // |x J1(x)| <= min(x^2 / 2, 0.8 sqrt(x)) sets the absolute error scale.
  const double bound = std::min(0.5 * b * b, 0.8 * std::sqrt(b));
  quadrature::Options opts;
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-13 * bound * span;
  auto integrand = [](double x) { return x * bessel_j1(x); };
  return quadrature::integrate<double>(integrand, breaks, opts).value;
}

std::complex<double> plate_reflection_coefficient(double kappa,
                                                  const PlateParameters& plate,
                                                  const OperatingPoint& op) {
  if (!(kappa > 0.0)) throw DomainError("spatial frequency must be positive");
  const double beta = op.omega * kMu0 * plate.sigma;
  const cplx jbeta(0.0, beta);
  const cplx lambda = std::sqrt(cplx(kappa * kappa, beta));
  const cplx z = 2.0 * lambda * plate.thickness;
  const cplx e = z.real() > 1400.0 ? cplx(0.0) : std::exp(-z);
  const cplx one_minus_e = -expm1(-z);
  const cplx sum = lambda + kappa;
  const cplx diff = jbeta / sum;  // lambda - kappa
  return (-jbeta * one_minus_e) / (sum * sum - diff * diff * e);
}

CoilWindow::CoilWindow(double radius_ratio, double table_limit)
    : radius_ratio_(radius_ratio), table_limit_(table_limit) {
  if (!(radius_ratio > 0.0 && radius_ratio < 1.0)) {
    throw DomainError("coil radius ratio must lie in (0, 1)");
  }
  if (!(table_limit > 0.0)) throw DomainError("table limit must be positive");
  panels_ = static_cast<std::size_t>(std::ceil(table_limit / kPanelWidth));
  table_limit_ = static_cast<double>(panels_) * kPanelWidth;
  coeffs_.assign(panels_ * kPanelNodes, 0.0);

  constexpr int n = kPanelNodes;
  double samples[n];
  double theta[n];
  for (int j = 0; j < n; ++j) {
    theta[j] = std::numbers::pi * (j + 0.5) / n;
  }
  // Sample values come from one running antiderivative F(x) of x J1(x):
  // w(u) = (F(u) - F(u t)) / u^3, with every gap integrated once.
  std::vector<double> nodes;
  nodes.reserve(2 * panels_ * n);
  for (std::size_t p = 0; p < panels_; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * kPanelWidth;
    for (int j = 0; j < n; ++j) {
      const double u = mid + 0.5 * kPanelWidth * std::cos(theta[j]);
      nodes.push_back(u);
      nodes.push_back(u * radius_ratio_);
    }
  }
  std::vector<double> xs = nodes;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> antiderivative(xs.size());
  double running = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    running += coil_window_integral(prev, xs[i]);
    antiderivative[i] = running;
    prev = xs[i];
  }
  auto lookup = [&](double x) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    return antiderivative[static_cast<std::size_t>(it - xs.begin())];
  };
  for (std::size_t p = 0; p < panels_; ++p) {
    for (int j = 0; j < n; ++j) {
      const double u = nodes[2 * (p * n + j)];
      const double ut = nodes[2 * (p * n + j) + 1];
      samples[j] = (lookup(u) - lookup(ut)) / (u * u * u);
    }
    double* c = &coeffs_[p * n];
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += samples[j] * std::cos(k * theta[j]);
      c[k] = 2.0 * acc / n;
    }
    c[0] *= 0.5;
  }
}

double CoilWindow::direct(double u) const {
  if (!(u >= 0.0)) throw DomainError("coil window argument must be >= 0");
  if (u == 0.0) return (1.0 - radius_ratio_ * radius_ratio_ * radius_ratio_) / 6.0;
  return coil_window_integral(u * radius_ratio_, u) / (u * u * u);
}

double CoilWindow::operator()(double u) const {
  if (!(u >= 0.0)) throw DomainError("coil window argument must be >= 0");
  if (u >= table_limit_) return direct(u);
  const auto p = std::min(static_cast<std::size_t>(u / kPanelWidth), panels_ - 1);
  const double x =
      (u - (static_cast<double>(p) + 0.5) * kPanelWidth) / (0.5 * kPanelWidth);
  const double* c = &coeffs_[p * kPanelNodes];
  // Clenshaw recurrence.
  double b1 = 0.0;
  double b2 = 0.0;
  for (int k = kPanelNodes - 1; k >= 1; --k) {
    const double b0 = 2.0 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

ImpedanceModel::ImpedanceModel(const ProbeGeometry& probe,
                               ForwardOptions options)
    : probe_(probe),
      options_(options),
      window_((probe.validate(), probe.shape_radius())) {}

double ImpedanceModel::truncation_point(double lift_off) const {
  const double t = probe_.shape_radius();
  const double pi4 = lift_off / probe_.characteristic_length();
  const double peak = window_envelope(0.0, t) * window_envelope(0.0, t);
  const double target = options_.truncation * peak;
  auto envelope = [&](double u) {
    const double w = window_envelope(u, t);
    return std::exp(-2.0 * u * pi4) * w * w;
  };
  double lo = 1.0;
  double hi = 2.0;
  while (envelope(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) break;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (envelope(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

ImpedanceResult ImpedanceModel::evaluate(const PlateParameters& plate,
                                         const OperatingPoint& op) const {
  quadrature::Options quad;
  quad.rel_tol = options_.rel_tol;
  return evaluate(plate, op, quad);
}

ImpedanceResult ImpedanceModel::evaluate(const PlateParameters& plate,
                                         const OperatingPoint& op,
                                         const quadrature::Options& quad) const {
  if (probe_.tilt != 0.0) {
    throw DomainError("tilted coils are not supported by the forward model");
  }
  if (!(plate.sigma > 0.0) || !std::isfinite(plate.sigma)) {
    throw DomainError("plate conductivity must be positive");
  }
  if (!(plate.thickness > 0.0) || !std::isfinite(plate.thickness)) {
    throw DomainError("plate thickness must be positive");
  }
  if (!(op.omega > 0.0) || !std::isfinite(op.omega)) {
    throw DomainError("angular frequency must be positive");
  }
  if (!(op.lift_off >= 0.0) || !std::isfinite(op.lift_off)) {
    throw DomainError("lift-off must be non-negative");
  }

  const double re = probe_.outer_radius;
  const double ri = probe_.inner_radius;
  const double hc = probe_.height;
  const double u_max = truncation_point(op.lift_off);

  // Geometric breakpoints in u = kappa re resolve the peak near u ~ 1 and
  // the long exponential tail alike.
  std::vector<double> breaks{0.0};
  for (double u = 0.5; u < u_max; u *= 2.0) breaks.push_back(u / re);
  if (window_.table_limit() < u_max) breaks.push_back(window_.table_limit() / re);
  breaks.push_back(u_max / re);
  std::sort(breaks.begin(), breaks.end());

  const double re6 = std::pow(re, 6);
  auto integrand = [&](double kappa) -> cplx {
    if (kappa == 0.0) return cplx(0.0);
    const double w = window_(kappa * re);
    const double decay = std::exp(-kappa * op.lift_off) * -std::expm1(-kappa * hc);
    return (w * w * re6 * decay * decay) *
           plate_reflection_coefficient(kappa, plate, op);
  };
  const auto integral = quadrature::integrate<cplx>(integrand, breaks, quad);

  const double scale = op.omega * std::numbers::pi * kMu0 * probe_.turns *
                       probe_.turns / (hc * hc * (re - ri) * (re - ri));
  ImpedanceResult out;
  out.delta_z = cplx(0.0, scale) * integral.value;
  out.error_estimate = scale * integral.error_estimate;
  out.evaluations = integral.evaluations;
  out.kappa_max = u_max / re;
  return out;
}

std::complex<double> delta_impedance(const ProbeGeometry& probe,
                                     const PlateParameters& plate,
                                     const OperatingPoint& op) {
  return ImpedanceModel(probe).delta_impedance(plate, op);
}

}  // namespace ectpi

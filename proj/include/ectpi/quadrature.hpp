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

// Globally adaptive 7/15-point Gauss-Kronrod quadrature for real or complex
// integrands on a finite interval. The error model follows QUADPACK's QK15.

#ifndef ECTPI_QUADRATURE_HPP_
#define ECTPI_QUADRATURE_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "ectpi/error.hpp"

namespace ectpi::quadrature {

template <typename T>
struct Result {
  T value{};
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_intervals = 4000;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

// Kronrod abscissae (descending) and weights for the 15-point rule; the
// Gauss 7-point rule uses every second abscissa.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Panel {
  double a = 0.0;
  double b = 0.0;
  T value{};
  double error = 0.0;

  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename T, typename F>
Panel<T> kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  const T fc = f(center);
  T result_gauss = fc * kWg[3];
  T result_kronrod = fc * kWgk[7];
  double result_abs = magnitude(result_kronrod);

  T fv1[7];
  T fv2[7];
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const T f1 = f(center - dx);
    const T f2 = f(center + dx);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    result_gauss += kWg[j] * (f1 + f2);
    result_kronrod += kWgk[jtw] * (f1 + f2);
    result_abs += kWgk[jtw] * (magnitude(f1) + magnitude(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const T f1 = f(center - dx);
    const T f2 = f(center + dx);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    result_kronrod += kWgk[jtwm1] * (f1 + f2);
    result_abs += kWgk[jtwm1] * (magnitude(f1) + magnitude(f2));
  }

  const T mean = result_kronrod * 0.5;
  double result_asc = kWgk[7] * magnitude(fc - mean);
  for (int j = 0; j < 7; ++j) {
    result_asc += kWgk[j] * (magnitude(fv1[j] - mean) + magnitude(fv2[j] - mean));
  }

  Panel<T> panel;
  panel.a = a;
  panel.b = b;
  panel.value = result_kronrod * half;
  result_abs *= abs_half;
  result_asc *= abs_half;
  double err = magnitude((result_kronrod - result_gauss) * half);
  if (result_asc != 0.0 && err != 0.0) {
    err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
  }
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  if (result_abs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * result_abs, err);
  }
  panel.error = err;
  return panel;
}

}  // namespace detail

// Integrates f over the union of consecutive intervals [breaks[i], breaks[i+1]]
// and keeps bisecting the worst panel until the summed error estimate drops
// below max(abs_tol, rel_tol * |I|). Throws NumericError otherwise.
template <typename T, typename F>
Result<T> integrate(F&& f, std::span<const double> breaks,
                    const Options& opts = {}) {
  if (breaks.size() < 2) {
    throw DomainError("quadrature needs at least one interval");
  }
  std::priority_queue<detail::Panel<T>> heap;
  Result<T> out;
  T total{};
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] >= breaks[i])) {
      throw DomainError("quadrature breakpoints must be non-decreasing");
    }
    if (breaks[i + 1] == breaks[i]) continue;
    auto p = detail::kronrod15<T>(f, breaks[i], breaks[i + 1]);
    out.evaluations += 15;
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  auto tolerance = [&] {
    return std::max(opts.abs_tol, opts.rel_tol * detail::magnitude(total));
  };
  while (!heap.empty() && total_err > tolerance()) {
    if (heap.size() >= opts.max_intervals) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not converge: error estimate "
          << total_err << " exceeds tolerance " << tolerance() << " after "
          << heap.size() << " intervals";
      throw NumericError(msg.str(), total_err);
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      std::ostringstream msg;
      msg << "adaptive quadrature hit floating-point resolution at ["
          << worst.a << ", " << worst.b << "] with error estimate " << total_err;
      throw NumericError(msg.str(), total_err);
    }
    auto left = detail::kronrod15<T>(f, worst.a, mid);
    auto right = detail::kronrod15<T>(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift from incremental updates.
  T resum{};
  double err_sum = 0.0;
  out.intervals = heap.size();
  while (!heap.empty()) {
    resum += heap.top().value;
    err_sum += heap.top().error;
    heap.pop();
  }
  out.value = resum;
  out.error_estimate = err_sum;
  return out;
}

template <typename T, typename F>
Result<T> integrate(F&& f, double a, double b, const Options& opts = {}) {
  const double breaks[2] = {a, b};
  return integrate<T>(std::forward<F>(f), std::span<const double>(breaks, 2),
                      opts);
}

}  // namespace ectpi::quadrature

#endif  // ECTPI_QUADRATURE_HPP_

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

#include "ectpi/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ectpi/error.hpp"
#include "ectpi/nondim.hpp"
#include "json.hpp"

namespace ectpi {

namespace {

using Sets = std::vector<std::vector<Polyline2>>;

struct PlanarSolution {
  Point2 point;
  std::size_t candidates = 0;
  double max_distance = 0.0;
  double min_angle = 0.0;
  std::optional<Point2> pairwise_mean;
};

std::string describe_candidates(const std::vector<CandidatePoint>& c) {
  std::ostringstream msg;
  msg.precision(6);
  for (std::size_t i = 0; i < c.size() && i < 6; ++i) {
    msg << (i ? ", " : "") << "(" << c[i].x << ", " << c[i].y << ")";
  }
  if (c.size() > 6) msg << ", ...";
  return msg.str();
}

// Two sets: their unique crossing. More: the common point of all sets.
PlanarSolution solve_planar(const Sets& sets, const PlaneScale& scale, double tol) {
  PlanarSolution s;
  if (sets.size() == 2) {
    const auto hits = intersect_curves(sets[0], sets[1], scale, tol);
    if (hits.empty()) {
      throw DataError(
          "the projected compatibility curves do not intersect; the "
          "measurements are incompatible with one plate in the database range");
    }
    if (hits.size() > 1) {
      std::vector<CandidatePoint> cands;
      for (const auto& h : hits) cands.push_back({h.point.x, h.point.y});
      throw AmbiguityError(
          "the projected compatibility curves intersect at " +
              std::to_string(hits.size()) + " separated points [" +
              describe_candidates(cands) +
              "]; add a measurement at a further frequency to select one",
          cands);
    }
    s.point = hits.front().point;
    s.candidates = 1;
    s.min_angle = hits.front().angle;
    return s;
  }
  const CommonPoint cp = common_point(sets, scale, tol);
  s.point = cp.point;
  s.candidates = cp.candidates;
  s.max_distance = cp.max_distance;
  s.min_angle = cp.pairwise_angles.empty()
                    ? 0.0
                    : *std::min_element(cp.pairwise_angles.begin(),
                                        cp.pairwise_angles.end());
  s.pairwise_mean = cp.pairwise_mean;
  return s;
}

void require_count(const std::vector<TracedMeasurement>& ms, std::size_t n,
                   const char* method) {
  if (ms.size() < n) {
    std::ostringstream msg;
    msg << method << " needs at least " << n << " measurements (got "
        << ms.size() << ")";
    throw ConfigError(msg.str());
  }
}

void require_distinct_frequencies(const std::vector<TracedMeasurement>& ms,
                                  const char* method) {
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      if (ms[i].measurement.frequency_hz == ms[j].measurement.frequency_hz) {
        std::ostringstream msg;
        msg << method << " needs distinct frequencies; measurements '"
            << ms[i].measurement.id << "' and '" << ms[j].measurement.id
            << "' share " << ms[i].measurement.frequency_hz << " Hz";
        throw ConfigError(msg.str());
      }
    }
  }
}

std::vector<std::string> ids(const std::vector<TracedMeasurement>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms) out.push_back(m.measurement.id);
  return out;
}

double max_omega(const std::vector<TracedMeasurement>& ms) {
  double w = 0.0;
  for (const auto& m : ms) w = std::max(w, m.omega);
  return w;
}

std::vector<Polyline2> projected(const TracedMeasurement& m, Plane plane,
                                 bool dimensional, double d) {
  std::vector<Polyline2> out;
  for (const auto& c : m.curves) {
    Polyline2 p = project(c, plane);
    out.push_back(dimensional ? to_dimensional(p, d) : p);
  }
  return out;
}

void finish(EstimationResult& r, const PlanarSolution& s,
            const EstimatorOptions& o) {
  r.candidates = s.candidates;
  r.max_distance = s.max_distance;
  r.tolerance = o.effective_tol();
  r.min_crossing_angle = s.min_angle;
  r.ill_conditioned = s.min_angle < o.min_angle;
}

std::vector<TracedMeasurement> trace_each(const std::vector<Measurement>& ms,
                                          const ResponseGrid& grid,
                                          const EstimatorOptions& o) {
  std::vector<TracedMeasurement> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(trace_measurement(m, grid, o));
  return out;
}

// Merges overlapping intervals in place (sorted by lower end).
std::vector<Interval> merge(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

std::vector<Interval> intersect(const std::vector<Interval>& a,
                                const std::vector<Interval>& b) {
  std::vector<Interval> out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      const double lo = std::max(x.lo, y.lo);
      const double hi = std::min(x.hi, y.hi);
      if (lo <= hi) out.push_back({lo, hi});
    }
  }
  return merge(out);
}

}  // namespace

void Measurement::validate() const {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
    throw ConfigError("measurement '" + id + "': frequency must be positive");
  }
  if (!std::isfinite(delta_z.real()) || !std::isfinite(delta_z.imag())) {
    throw ConfigError("measurement '" + id + "': impedance must be finite");
  }
}

double EstimatorOptions::effective_tol() const {
  return std::max(tol, noise_tol_gain * noise_rel);
}

const char* to_string(ThicknessInvariantMode mode) {
  return mode == ThicknessInvariantMode::kThicknessVaried ? "thickness-varied"
                                                          : "three-frequency";
}

double EstimationResult::value(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return q.value;
  }
  throw DomainError("estimation result has no quantity '" + name + "'");
}

bool EstimationResult::has(const std::string& name) const {
  return std::any_of(quantities.begin(), quantities.end(),
                     [&](const EstimatedQuantity& q) { return q.name == name; });
}

std::string to_json(const EstimationResult& r) {
  using nlohmann::json;
  auto qs = [](const std::vector<EstimatedQuantity>& v) {
    json a = json::array();
    for (const auto& q : v) {
      a.push_back({{"name", q.name}, {"value", q.value}, {"unit", q.unit}});
    }
    return a;
  };
  json j{{"method", r.method},
         {"plane", r.plane},
         {"quantities", qs(r.quantities)},
         {"diagnostics",
          {{"candidates", r.candidates},
           {"max_distance", r.max_distance},
           {"tolerance", r.tolerance},
           {"min_crossing_angle_rad", r.min_crossing_angle},
           {"ill_conditioned", r.ill_conditioned}}},
         {"measurement_ids", r.measurement_ids}};
  if (!r.pairwise_mean.empty()) j["pairwise_mean"] = qs(r.pairwise_mean);
  if (!r.region.empty()) {
    json reg = json::array();
    for (const auto& iv : r.region) reg.push_back({iv.lo, iv.hi});
    j["region"] = reg;
    j["region_width"] = r.region_width;
  }
  return j.dump();
}

PlaneScale sigma_thickness_scale(const ResponseGrid& grid, double omega_max) {
  const double d = grid.probe().characteristic_length();
  const double s = sigma_from_pi2(grid.axis(0).back(), omega_max, d) -
                   sigma_from_pi2(grid.axis(0).front(), omega_max, d);
  return {s, grid.spans()[1] * d};
}

PlaneScale sigma_liftoff_scale(const ResponseGrid& grid, double omega_max) {
  const double d = grid.probe().characteristic_length();
  const double s = sigma_from_pi2(grid.axis(0).back(), omega_max, d) -
                   sigma_from_pi2(grid.axis(0).front(), omega_max, d);
  return {s, grid.spans()[2] * d};
}

TracedMeasurement trace_measurement(const Measurement& m, const ResponseGrid& grid,
                                    const EstimatorOptions& options) {
  m.validate();
  TracedMeasurement t;
  t.measurement = m;
  t.omega = angular_frequency(m.frequency_hz);
  const auto& probe = grid.probe();
  t.pi1 = nondimensionalize(m.delta_z, t.omega, probe.characteristic_length(),
                            probe.turns)
              .pi1;
  t.curves = trace_all(grid, t.pi1, options.level, CurveTag{t.omega, m.id},
                       options.trace, options.seeds);
  return t;
}

EstimationResult estimate_conductivity_thickness(
    const std::vector<Measurement>& ms, const ResponseGrid& grid,
    const EstimatorOptions& options) {
  if (ms.size() < 2) {
    throw ConfigError("liftoff-invariant estimation needs at least 2 measurements");
  }
  return estimate_conductivity_thickness(trace_each(ms, grid, options), grid,
                                         options);
}

EstimationResult estimate_conductivity_thickness(
    const std::vector<TracedMeasurement>& ms, const ResponseGrid& grid,
    const EstimatorOptions& options) {
  const char* method = "liftoff-invariant";
  require_count(ms, 2, method);
  require_distinct_frequencies(ms, method);
  const double d = grid.probe().characteristic_length();
  Sets sets;
  for (const auto& m : ms) sets.push_back(projected(m, Plane::kPi2Pi3, true, d));
  const auto sol = solve_planar(sets, sigma_thickness_scale(grid, max_omega(ms)),
                                options.effective_tol());
  EstimationResult r;
  r.method = method;
  r.plane = "sigma-thickness";
  r.quantities = {{"sigma", sol.point.x, "S/m"}, {"thickness", sol.point.y, "m"}};
  if (sol.pairwise_mean) {
    r.pairwise_mean = {{"sigma", sol.pairwise_mean->x, "S/m"},
                       {"thickness", sol.pairwise_mean->y, "m"}};
  }
  r.measurement_ids = ids(ms);
  finish(r, sol, options);
  return r;
}

EstimationResult estimate_thickness_liftoff(const std::vector<Measurement>& ms,
                                            const ResponseGrid& grid,
                                            const EstimatorOptions& options) {
  if (ms.size() < 2) {
    throw ConfigError("sigma-invariant estimation needs at least 2 measurements");
  }
  return estimate_thickness_liftoff(trace_each(ms, grid, options), grid, options);
}

EstimationResult estimate_thickness_liftoff(
    const std::vector<TracedMeasurement>& ms, const ResponseGrid& grid,
    const EstimatorOptions& options) {
  const char* method = "sigma-invariant";
  require_count(ms, 2, method);
  require_distinct_frequencies(ms, method);
  const double d = grid.probe().characteristic_length();
  Sets sets;
  for (const auto& m : ms) sets.push_back(projected(m, Plane::kPi3Pi4, false, d));
  const auto sol = solve_planar(sets, plane_scale(grid, Plane::kPi3Pi4),
                                options.effective_tol());
  EstimationResult r;
  r.method = method;
  r.plane = "pi3-pi4";
  r.quantities = {{"thickness", sol.point.x * d, "m"},
                  {"lift_off", sol.point.y * d, "m"},
                  {"pi3", sol.point.x, "1"},
                  {"pi4", sol.point.y, "1"}};
  if (sol.pairwise_mean) {
    r.pairwise_mean = {{"thickness", sol.pairwise_mean->x * d, "m"},
                       {"lift_off", sol.pairwise_mean->y * d, "m"}};
  }
  r.measurement_ids = ids(ms);
  finish(r, sol, options);
  return r;
}

EstimationResult estimate_conductivity_liftoff(const std::vector<Measurement>& ms,
                                               const ResponseGrid& grid,
                                               ThicknessInvariantMode mode,
                                               const EstimatorOptions& options) {
  if (ms.size() < 2) {
    throw ConfigError("thickness-invariant estimation needs at least 2 measurements");
  }
  return estimate_conductivity_liftoff(trace_each(ms, grid, options), grid, mode,
                                       options);
}

EstimationResult estimate_conductivity_liftoff(
    const std::vector<TracedMeasurement>& ms, const ResponseGrid& grid,
    ThicknessInvariantMode mode, const EstimatorOptions& options) {
  const char* method = "thickness-invariant";
  require_count(ms, 2, method);
  const double d = grid.probe().characteristic_length();
  EstimationResult r;
  r.method = std::string(method) + "/" + to_string(mode);
  r.measurement_ids = ids(ms);

  if (mode == ThicknessInvariantMode::kThicknessVaried) {
    for (const auto& m : ms) {
      if (m.measurement.frequency_hz != ms.front().measurement.frequency_hz) {
        throw ConfigError(
            "thickness-varied mode needs every measurement at one frequency");
      }
    }
    Sets sets;
    for (const auto& m : ms) sets.push_back(projected(m, Plane::kPi2Pi4, false, d));
    const auto sol = solve_planar(sets, plane_scale(grid, Plane::kPi2Pi4),
                                  options.effective_tol());
    const double omega = ms.front().omega;
    r.plane = "pi2-pi4";
    r.quantities = {{"sigma", sigma_from_pi2(sol.point.x, omega, d), "S/m"},
                    {"lift_off", sol.point.y * d, "m"},
                    {"pi2", sol.point.x, "1"},
                    {"pi4", sol.point.y, "1"}};
    finish(r, sol, options);
    return r;
  }

  require_distinct_frequencies(ms, method);
  Sets sets;
  for (const auto& m : ms) sets.push_back(projected(m, Plane::kPi2Pi4, true, d));
  const auto scale = sigma_liftoff_scale(grid, max_omega(ms));
  const auto sol = solve_planar(sets, scale, options.effective_tol());
  if (ms.size() == 2) {
    // A single crossing from two frequencies is accepted but flagged: two
    // curves on a constant-thickness plate generally cross twice.
    r.ill_conditioned = true;
  }
  r.plane = "sigma-lift_off";
  r.quantities = {{"sigma", sol.point.x, "S/m"}, {"lift_off", sol.point.y, "m"}};
  if (sol.pairwise_mean) {
    r.pairwise_mean = {{"sigma", sol.pairwise_mean->x, "S/m"},
                       {"lift_off", sol.pairwise_mean->y, "m"}};
  }
  const bool flagged = r.ill_conditioned;
  finish(r, sol, options);
  r.ill_conditioned = r.ill_conditioned || flagged;
  return r;
}

EstimationResult estimate_single(const std::vector<Measurement>& ms,
                                 const ResponseGrid& grid, int pi_index,
                                 const EstimatorOptions& options) {
  if (ms.size() < 2) {
    throw ConfigError("single-axis estimation needs at least 2 measurements");
  }
  return estimate_single(trace_each(ms, grid, options), grid, pi_index, options);
}

EstimationResult estimate_single(const std::vector<TracedMeasurement>& ms,
                                 const ResponseGrid& grid, int pi_index,
                                 const EstimatorOptions& options) {
  (void)options;
  const char* method = "single";
  require_count(ms, 2, method);
  if (pi_index < 2 || pi_index > 4) {
    throw ConfigError("single-axis estimation targets pi2, pi3 or pi4");
  }
  if (pi_index == 2) {
    for (const auto& m : ms) {
      if (m.measurement.frequency_hz != ms.front().measurement.frequency_hz) {
        throw ConfigError(
            "single-axis estimation of pi2 needs every measurement at one "
            "frequency");
      }
    }
  }
  std::vector<Interval> region;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    std::vector<Interval> own;
    for (const auto& c : ms[k].curves) own.push_back(project_axis(c, pi_index));
    own = merge(own);
    region = k == 0 ? own : intersect(region, own);
  }
  if (region.empty()) {
    throw DataError(
        "the axis projections of the compatibility curves share no value; "
        "the measurements are incompatible");
  }
  const double lo = region.front().lo;
  const double hi = region.back().hi;
  const double mid = 0.5 * (lo + hi);
  const double d = grid.probe().characteristic_length();

  EstimationResult r;
  r.method = method;
  r.plane = "pi" + std::to_string(pi_index);
  r.region = region;
  r.region_width = hi - lo;
  r.candidates = region.size();
  r.measurement_ids = ids(ms);
  r.quantities.push_back({"pi" + std::to_string(pi_index), mid, "1"});
  if (pi_index == 2) {
    r.quantities.push_back({"sigma", sigma_from_pi2(mid, ms.front().omega, d), "S/m"});
  } else {
    r.quantities.push_back({pi_index == 3 ? "thickness" : "lift_off", mid * d, "m"});
  }
  return r;
}

}  // namespace ectpi

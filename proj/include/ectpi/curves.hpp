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

// Compatibility curves: the set of pi triples whose interpolated response
// matches one complex measurement. Curves are traced by pseudo-arclength
// continuation along the cross product of the two level-function gradients,
// then projected onto coordinate planes and intersected there.
//
// Distances and step sizes are in axis-normalised units: every pi axis is
// mapped linearly onto [0, 1] using the grid bounds.

#ifndef ECTPI_CURVES_HPP_
#define ECTPI_CURVES_HPP_

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ectpi/nondim.hpp"
#include "ectpi/response_grid.hpp"

namespace ectpi {

// The two real functions whose level sets are intersected.
enum class LevelFunctions { kReIm, kMagPhase };

const char* to_string(LevelFunctions g);
LevelFunctions level_functions_from_string(const std::string& name);

std::array<double, 2> level_values(LevelFunctions g, std::complex<double> z);

// g(f) - g(target); the phase difference is wrapped into (-pi, pi].
std::array<double, 2> level_residuals(LevelFunctions g, std::complex<double> f,
                                      std::complex<double> target);

struct CurveTag {
  double omega = 0.0;  // rad/s of the generating measurement, 0 if unknown
  std::string id;
};

enum class TraceStatus { kComplete, kCorrectorFailed, kSingular, kBudget };

const char* to_string(TraceStatus s);

struct Polyline3 {
  std::vector<PiPoint> points;
  CurveTag tag;
  bool closed = false;  // last point repeats the first
  TraceStatus status = TraceStatus::kComplete;
  std::string diagnostic;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

// Axes are named by pi index: 2 -> pi2, 3 -> pi3, 4 -> pi4.
enum class Plane { kPi2Pi3, kPi3Pi4, kPi2Pi4 };

const char* to_string(Plane p);

// Pi indices (2, 3 or 4) of the plane's horizontal and vertical axes.
std::array<int, 2> plane_axes(Plane p);

struct Polyline2 {
  std::vector<Point2> points;
  Plane plane = Plane::kPi2Pi3;
  // After to_dimensional: x is sigma in S/m, y is a length in m.
  bool dimensional = false;
  CurveTag tag;
  bool closed = false;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Interval&) const = default;
};

// Divisors that make planar distances comparable to normalised pi units.
struct PlaneScale {
  double sx = 1.0;
  double sy = 1.0;
};

PlaneScale plane_scale(const ResponseGrid& grid, Plane plane);

struct SeedOptions {
  double residual_tol = 1e-9;
  int max_iterations = 40;
  double dedup_distance = 1e-6;
};

struct TraceOptions {
  double initial_step = 1e-2;
  double max_step = 5e-2;
  double min_step = 1e-7;
  // Chord-to-arc deviation aimed for when adapting the step.
  double sagitta_tol = 2e-6;
  // Largest tangent turn per accepted step, radians.
  double max_turn = 0.25;
  double residual_tol = 1e-11;
  int max_newton = 12;
  std::size_t max_points = 200000;
  int closure_min_steps = 10;
  // Seeds closer than this to an already traced curve are not retraced.
  double coverage_distance = 5e-5;
};

// Seeds from every cell whose corner residuals both change sign, refined by
// minimum-norm Gauss-Newton. Deterministic order. Empty when the target is
// outside what the grid can produce.
std::vector<PiPoint> find_seeds(const ResponseGrid& grid,
                                std::complex<double> target, LevelFunctions g,
                                const SeedOptions& options = {});
std::vector<PiPoint> find_seeds_serial(const ResponseGrid& grid,
                                       std::complex<double> target,
                                       LevelFunctions g,
                                       const SeedOptions& options = {});

Polyline3 trace_curve(const ResponseGrid& grid, const PiPoint& seed,
                      std::complex<double> target, LevelFunctions g,
                      const CurveTag& tag = {}, const TraceOptions& options = {});

// Every curve component through the grid box. Throws DataError when no seed
// exists.
std::vector<Polyline3> trace_all(const ResponseGrid& grid,
                                 std::complex<double> target, LevelFunctions g,
                                 const CurveTag& tag = {},
                                 const TraceOptions& trace = {},
                                 const SeedOptions& seeds = {});

// Unit tangent (normalised coordinates) of the curve through p; nullopt
// where the gradients are parallel.
std::optional<std::array<double, 3>> curve_tangent(const ResponseGrid& grid,
                                                   const PiPoint& p,
                                                   LevelFunctions g,
                                                   std::complex<double> target);

Polyline2 project(const Polyline3& curve, Plane plane);
// Re-attaches the dropped coordinate, one value per point.
Polyline3 lift(const Polyline2& curve, const std::vector<double>& dropped);
// pi_index in {2, 3, 4}.
Interval project_axis(const Polyline3& curve, int pi_index);

// (pi2, pi3) -> (sigma, thickness) or (pi2, pi4) -> (sigma, lift-off) using
// the curve's generating frequency.
Polyline2 to_dimensional(const Polyline2& curve, double characteristic_length);

struct Intersection {
  Point2 point;
  double angle = 0.0;       // crossing angle in normalised units, [0, pi/2]
  std::size_t merged = 1;   // raw crossings folded into this cluster
};

std::vector<Intersection> intersect_curves(const Polyline2& a, const Polyline2& b,
                                           const PlaneScale& scale, double tol);
std::vector<Intersection> intersect_curves(const std::vector<Polyline2>& a,
                                           const std::vector<Polyline2>& b,
                                           const PlaneScale& scale, double tol);

double distance_to_curve(const Point2& p, const Polyline2& curve,
                         const PlaneScale& scale);
double distance_to_curves(const Point2& p, const std::vector<Polyline2>& curves,
                          const PlaneScale& scale);

struct CommonPoint {
  Point2 point;
  std::vector<double> distances;  // per curve set, normalised
  double max_distance = 0.0;
  std::size_t candidates = 0;
  // Pairwise intersections closest to the accepted point, one per pair of
  // curve sets, and their mean.
  std::vector<Point2> pairwise;
  std::vector<double> pairwise_angles;
  Point2 pairwise_mean;
};

// Each entry of `sets` holds every projected component of one measurement.
// Candidates are the pairwise crossings (and centroids of crossing triples);
// the one with the smallest maximum distance to all sets wins if that
// distance is below tol. Throws AmbiguityError when none qualifies, or when a
// candidate more than 10 tol away scores within a factor 10 of the winner.
CommonPoint common_point(const std::vector<std::vector<Polyline2>>& sets,
                         const PlaneScale& scale, double tol);

// Symmetric Hausdorff distance between polylines (vertex-to-segment).
double hausdorff(const Polyline2& a, const Polyline2& b, const PlaneScale& scale);
double hausdorff(const std::vector<Polyline2>& a, const std::vector<Polyline2>& b,
                 const PlaneScale& scale);
// Hausdorff distance restricted to the overlap of the two sets' bounding
// boxes, so curves clipped differently by the database box compare only where
// both exist. Infinite when the boxes do not overlap.
double overlap_hausdorff(const std::vector<Polyline2>& a,
                         const std::vector<Polyline2>& b, const PlaneScale& scale);
// In the grid's normalised coordinates.
double hausdorff(const ResponseGrid& grid, const Polyline3& a, const Polyline3& b);
double hausdorff(const ResponseGrid& grid, const std::vector<Polyline3>& a,
                 const std::vector<Polyline3>& b);

// Normalised distance from p to the nearest segment of any curve.
double distance_to_curves(const ResponseGrid& grid, const PiPoint& p,
                          const std::vector<Polyline3>& curves);

// CSV columns: s, pi2, pi3, pi4, residual1, residual2, curve. s is the
// normalised arc length within each curve; curve indexes the component.
void write_curve_csv(std::ostream& out, const ResponseGrid& grid,
                     const std::vector<Polyline3>& curves,
                     std::complex<double> target, LevelFunctions g);

}  // namespace ectpi

#endif  // ECTPI_CURVES_HPP_

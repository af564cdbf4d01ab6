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

#include "ectpi/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ectpi/error.hpp"

namespace ectpi {

namespace {

using Vec3 = std::array<double, 3>;
using cplx = std::complex<double>;

double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 axpy(double s, const Vec3& a, const Vec3& b) {
  return {b[0] + s * a[0], b[1] + s * a[1], b[2] + s * a[2]};
}
double dist(const Vec3& a, const Vec3& b) {
  const Vec3 d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
  return norm(d);
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

// Solves the 3x3 system m x = b with partial pivoting; false if singular.
bool solve3(std::array<Vec3, 3> m, Vec3 b, Vec3& x) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (!(std::abs(m[piv][c]) > 1e-300)) return false;
    std::swap(m[c], m[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 3; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 3; ++k) s -= m[r][k] * x[k];
    x[r] = s / m[r][r];
  }
  // Reject numerically singular systems.
  double scale = 0.0;
  for (const auto& row : m) scale = std::max(scale, norm(row));
  return std::abs(m[2][2]) > 1e-13 * scale;
}

// Residuals and Jacobian with respect to normalised coordinates.
struct LevelEval {
  std::array<double, 2> r{};
  std::array<Vec3, 2> jac{};
  cplx value;
};

class LevelSystem {
 public:
  LevelSystem(const ResponseGrid& grid, cplx target, LevelFunctions g)
      : grid_(grid), target_(target), g_(g), spans_(grid.spans()) {
    for (int d = 0; d < 3; ++d) {
      lo_[d] = grid.axis(d).front();
      hi_[d] = grid.axis(d).back();
    }
  }

  PiPoint to_pi(const Vec3& x) const {
    double v[3];
    for (int d = 0; d < 3; ++d) {
      v[d] = std::clamp(lo_[d] + x[d] * spans_[d], lo_[d], hi_[d]);
    }
    return {v[0], v[1], v[2]};
  }
  Vec3 to_x(const PiPoint& p) const { return grid_.normalize(p); }

  LevelEval eval(const Vec3& x) const {
    const auto s = grid_.sample(to_pi(x));
    LevelEval e;
    e.value = s.value;
    const double re = s.value.real();
    const double im = s.value.imag();
    Vec3 gr;
    Vec3 gi;
    for (int d = 0; d < 3; ++d) {
      gr[d] = s.grad_re[d] * spans_[d];
      gi[d] = s.grad_im[d] * spans_[d];
    }
    e.r = level_residuals(g_, s.value, target_);
    if (g_ == LevelFunctions::kReIm) {
      e.jac = {gr, gi};
    } else {
      const double m2 = re * re + im * im;
      const double m = std::sqrt(m2);
      for (int d = 0; d < 3; ++d) {
        e.jac[0][d] = (re * gr[d] + im * gi[d]) / m;
        e.jac[1][d] = (re * gi[d] - im * gr[d]) / m2;
      }
    }
    return e;
  }

  static bool inside(const Vec3& x) {
    for (double v : x) {
      if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
  }

 private:
  const ResponseGrid& grid_;
  cplx target_;
  LevelFunctions g_;
  std::array<double, 3> spans_;
  double lo_[3];
  double hi_[3];
};

double rnorm(const std::array<double, 2>& r) {
  return std::max(std::abs(r[0]), std::abs(r[1]));
}

std::optional<Vec3> unit_tangent(const LevelEval& e) {
  const Vec3 c = cross(e.jac[0], e.jac[1]);
  const double n = norm(c);
  const double ref = norm(e.jac[0]) * norm(e.jac[1]);
  if (!(n > 1e-12 * ref) || !(ref > 0.0)) return std::nullopt;
  return Vec3{c[0] / n, c[1] / n, c[2] / n};
}

// Newton on (r1, r2, c . x - rhs) = 0, c being the constraint row.
bool newton_constrained(const LevelSystem& sys, Vec3& x, const Vec3& c,
                        double rhs, const TraceOptions& opt, LevelEval& out) {
  for (int it = 0; it <= opt.max_newton; ++it) {
    const LevelEval e = sys.eval(x);
    const double cres = dot(c, x) - rhs;
    if (rnorm(e.r) < opt.residual_tol && std::abs(cres) < 1e-13) {
      out = e;
      return true;
    }
    if (it == opt.max_newton) break;
    Vec3 dx;
    if (!solve3({e.jac[0], e.jac[1], c}, {-e.r[0], -e.r[1], -cres}, dx)) {
      return false;
    }
    x = axpy(1.0, dx, x);
    if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2])) {
      return false;
    }
    // Iterates may leave the box slightly; allow a margin and clamp later.
    for (double v : x) {
      if (v < -0.05 || v > 1.05) return false;
    }
  }
  return false;
}

// Length of the minimum-norm Gauss-Newton step from the chord midpoint.
double chord_deviation(const LevelSystem& sys, const Vec3& a, const Vec3& b) {
  const Vec3 mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
  const LevelEval e = sys.eval(mid);
  const double p = dot(e.jac[0], e.jac[0]);
  const double q = dot(e.jac[0], e.jac[1]);
  const double d = dot(e.jac[1], e.jac[1]);
  const double det = p * d - q * q;
  if (!(det > 0.0)) return std::numeric_limits<double>::infinity();
  const double y0 = (d * e.r[0] - q * e.r[1]) / det;
  const double y1 = (p * e.r[1] - q * e.r[0]) / det;
  const Vec3 dx{e.jac[0][0] * y0 + e.jac[1][0] * y1,
                e.jac[0][1] * y0 + e.jac[1][1] * y1,
                e.jac[0][2] * y0 + e.jac[1][2] * y1};
  return norm(dx);
}

struct Walk {
  std::vector<Vec3> points;
  bool closed = false;
  TraceStatus status = TraceStatus::kComplete;
  std::string diagnostic;
};

// Lands the curve on the box face it crosses between `from` (inside) and
// `to` (outside). Returns false when the corrector cannot resolve the exit.
bool land_on_face(const LevelSystem& sys, const Vec3& from, const Vec3& to,
                  const TraceOptions& opt, Vec3& hit) {
  int tried_mask = 0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    double best = std::numeric_limits<double>::infinity();
    int face = -1;
    double bound = 0.0;
    for (int d = 0; d < 3; ++d) {
      if (tried_mask & (1 << d)) continue;
      const double delta = to[d] - from[d];
      if (to[d] < 0.0 && delta < 0.0) {
        const double a = -from[d] / delta;
        if (a < best) { best = a; face = d; bound = 0.0; }
      } else if (to[d] > 1.0 && delta > 0.0) {
        const double a = (1.0 - from[d]) / delta;
        if (a < best) { best = a; face = d; bound = 1.0; }
      }
    }
    if (face < 0) return false;
    tried_mask |= 1 << face;
    Vec3 x = axpy(best, Vec3{to[0] - from[0], to[1] - from[1], to[2] - from[2]},
                  from);
    x[face] = bound;
    Vec3 c{0.0, 0.0, 0.0};
    c[face] = 1.0;
    LevelEval e;
    if (!newton_constrained(sys, x, c, bound, opt, e)) continue;
    x[face] = bound;
    bool ok = true;
    for (int d = 0; d < 3; ++d) {
      if (x[d] < -1e-12 || x[d] > 1.0 + 1e-12) ok = false;
      x[d] = std::clamp(x[d], 0.0, 1.0);
    }
    if (!ok) continue;
    const double step = dist(from, to);
    if (dist(from, x) > 2.0 * step + 1e-12) continue;
    hit = x;
    return true;
  }
  return false;
}

Walk walk(const LevelSystem& sys, const Vec3& x0, const Vec3& t0,
          const TraceOptions& opt) {
  Walk w;
  w.points.push_back(x0);
  Vec3 x = x0;
  Vec3 t = t0;
  double h = std::min(opt.initial_step, opt.max_step);
  int steps = 0;
  for (;;) {
    if (w.points.size() >= opt.max_points) {
      w.status = TraceStatus::kBudget;
      w.diagnostic = "point budget exhausted";
      return w;
    }
    if (h < opt.min_step) {
      w.status = TraceStatus::kCorrectorFailed;
      std::ostringstream msg;
      msg << "corrector failed at the minimum step near normalised ("
          << x[0] << ", " << x[1] << ", " << x[2] << ")";
      w.diagnostic = msg.str();
      return w;
    }
    const Vec3 xp = axpy(h, t, x);
    if (!LevelSystem::inside(xp)) {
      Vec3 hit;
      if (land_on_face(sys, x, xp, opt, hit)) {
        if (dist(hit, x) > 1e-14) w.points.push_back(hit);
        return w;
      }
      h *= 0.5;
      continue;
    }
    Vec3 xc = xp;
    LevelEval e;
    if (!newton_constrained(sys, xc, t, dot(t, xp), opt, e)) {
      h *= 0.5;
      continue;
    }
    if (!LevelSystem::inside(xc)) {
      Vec3 hit;
      if (land_on_face(sys, x, xc, opt, hit)) {
        if (dist(hit, x) > 1e-14) w.points.push_back(hit);
        return w;
      }
      h *= 0.5;
      continue;
    }
    const auto tn_opt = unit_tangent(e);
    if (!tn_opt) {
      w.status = TraceStatus::kSingular;
      w.diagnostic = "level-function gradients are parallel (singular point)";
      return w;
    }
    Vec3 tn = *tn_opt;
    if (dot(tn, t) < 0.0) tn = {-tn[0], -tn[1], -tn[2]};
    const double turn = std::acos(std::clamp(dot(tn, t), -1.0, 1.0));
    const double chord = dist(xc, x);
    // Distance from the chord midpoint back to the curve measures the
    // chord error directly; tangent turning alone misses S-shaped arcs.
    const double sag = chord_deviation(sys, x, xc);
    if ((turn > opt.max_turn || chord > 2.0 * h || sag > 4.0 * opt.sagitta_tol) &&
        h > opt.min_step) {
      h *= 0.5;
      continue;
    }
    w.points.push_back(xc);
    ++steps;
    if (steps >= opt.closure_min_steps && dist(xc, x0) < h &&
        dot(tn, t0) > 0.5) {
      w.points.push_back(x0);
      w.closed = true;
      return w;
    }
    double factor = sag > 0.0 ? std::sqrt(opt.sagitta_tol / sag) : 2.0;
    factor = std::clamp(factor, 0.5, 2.0);
    h = std::clamp(h * factor, opt.min_step, opt.max_step);
    x = xc;
    t = tn;
  }
}

Point2 pt2(const PiPoint& p, Plane plane) {
  switch (plane) {
    case Plane::kPi2Pi3: return {p.pi2, p.pi3};
    case Plane::kPi3Pi4: return {p.pi3, p.pi4};
    case Plane::kPi2Pi4: return {p.pi2, p.pi4};
  }
  return {};
}

double seg_dist2(double px, double py, double ax, double ay, double bx,
                 double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double l2 = dx * dx + dy * dy;
  double t = l2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = ax + t * dx - px;
  const double ey = ay + t * dy - py;
  return ex * ex + ey * ey;
}

double seg_dist3(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double l2 = dot(d, d);
  double t = 0.0;
  if (l2 > 0.0) {
    t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1] + (p[2] - a[2]) * d[2]) / l2;
  }
  t = std::clamp(t, 0.0, 1.0);
  return dist(axpy(t, d, a), p);
}

double point_to_polyline3(const Vec3& p, const std::vector<Vec3>& line) {
  if (line.empty()) return std::numeric_limits<double>::infinity();
  if (line.size() == 1) return dist(p, line[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, seg_dist3(p, line[i], line[i + 1]));
  }
  return best;
}

std::vector<Vec3> normalised(const ResponseGrid& grid, const Polyline3& c) {
  std::vector<Vec3> out;
  out.reserve(c.points.size());
  for (const auto& p : c.points) out.push_back(grid.normalize(p));
  return out;
}

std::vector<Point2> scaled(const Polyline2& c, const PlaneScale& s) {
  std::vector<Point2> out;
  out.reserve(c.points.size());
  for (const auto& p : c.points) out.push_back({p.x / s.sx, p.y / s.sy});
  return out;
}

double point_to_scaled(const Point2& p, const std::vector<Point2>& line) {
  if (line.empty()) return std::numeric_limits<double>::infinity();
  if (line.size() == 1) return std::hypot(p.x - line[0].x, p.y - line[0].y);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, seg_dist2(p.x, p.y, line[i].x, line[i].y,
                                    line[i + 1].x, line[i + 1].y));
  }
  return std::sqrt(best);
}

// Single-linkage clustering in scaled units; clusters collapse to centroids.
std::vector<Intersection> cluster(std::vector<Intersection> raw, double tol) {
  const std::size_t n = raw.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::hypot(raw[i].point.x - raw[j].point.x,
                     raw[i].point.y - raw[j].point.y) <= tol) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::vector<Intersection> out;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = out.size();
      out.push_back({{0.0, 0.0}, 0.0, 0});
    }
    auto& c = out[slot[r]];
    c.point.x += raw[i].point.x;
    c.point.y += raw[i].point.y;
    c.angle = std::max(c.angle, raw[i].angle);
    c.merged += 1;
  }
  for (auto& c : out) {
    c.point.x /= static_cast<double>(c.merged);
    c.point.y /= static_cast<double>(c.merged);
  }
  std::sort(out.begin(), out.end(), [](const Intersection& a, const Intersection& b) {
    return a.point.x != b.point.x ? a.point.x < b.point.x : a.point.y < b.point.y;
  });
  return out;
}

void raw_crossings(const std::vector<Point2>& a, const std::vector<Point2>& b,
                   std::vector<Intersection>& out) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    const Point2 p = a[i];
    const double rx = a[i + 1].x - p.x;
    const double ry = a[i + 1].y - p.y;
    const double axmin = std::min(p.x, a[i + 1].x);
    const double axmax = std::max(p.x, a[i + 1].x);
    const double aymin = std::min(p.y, a[i + 1].y);
    const double aymax = std::max(p.y, a[i + 1].y);
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      const Point2 q = b[j];
      const Point2 q1 = b[j + 1];
      if (std::max(q.x, q1.x) < axmin || std::min(q.x, q1.x) > axmax ||
          std::max(q.y, q1.y) < aymin || std::min(q.y, q1.y) > aymax) {
        continue;
      }
      const double sx = q1.x - q.x;
      const double sy = q1.y - q.y;
      const double den = rx * sy - ry * sx;
      if (!(std::abs(den) > 1e-14 * std::hypot(rx, ry) * std::hypot(sx, sy))) {
        continue;  // parallel
      }
      const double qpx = q.x - p.x;
      const double qpy = q.y - p.y;
      const double t = (qpx * sy - qpy * sx) / den;
      const double u = (qpx * ry - qpy * rx) / den;
      constexpr double eps = 1e-12;
      if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) continue;
      Intersection hit;
      hit.point = {p.x + t * rx, p.y + t * ry};
      hit.angle = std::atan2(std::abs(den), std::abs(rx * sx + ry * sy));
      out.push_back(hit);
    }
  }
}

}  // namespace

const char* to_string(LevelFunctions g) {
  return g == LevelFunctions::kReIm ? "re-im" : "mag-phase";
}

LevelFunctions level_functions_from_string(const std::string& name) {
  if (name == "re-im") return LevelFunctions::kReIm;
  if (name == "mag-phase") return LevelFunctions::kMagPhase;
  throw ConfigError("unknown level-function pair '" + name +
                    "' (expected re-im or mag-phase)");
}

std::array<double, 2> level_values(LevelFunctions g, std::complex<double> z) {
  if (g == LevelFunctions::kReIm) return {z.real(), z.imag()};
  if (z == 0.0) throw DomainError("magnitude/phase is singular at zero response");
  return {std::abs(z), std::arg(z)};
}

std::array<double, 2> level_residuals(LevelFunctions g, std::complex<double> f,
                                      std::complex<double> target) {
  if (g == LevelFunctions::kReIm) {
    return {f.real() - target.real(), f.imag() - target.imag()};
  }
  if (f == 0.0 || target == 0.0) {
    throw DomainError("magnitude/phase is singular at zero response");
  }
  return {std::abs(f) - std::abs(target), wrap_angle(std::arg(f) - std::arg(target))};
}

const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::kComplete: return "complete";
    case TraceStatus::kCorrectorFailed: return "corrector-failed";
    case TraceStatus::kSingular: return "singular";
    case TraceStatus::kBudget: return "budget";
  }
  return "unknown";
}

const char* to_string(Plane p) {
  switch (p) {
    case Plane::kPi2Pi3: return "pi2-pi3";
    case Plane::kPi3Pi4: return "pi3-pi4";
    case Plane::kPi2Pi4: return "pi2-pi4";
  }
  return "unknown";
}

std::array<int, 2> plane_axes(Plane p) {
  switch (p) {
    case Plane::kPi2Pi3: return {2, 3};
    case Plane::kPi3Pi4: return {3, 4};
    case Plane::kPi2Pi4: return {2, 4};
  }
  return {0, 0};
}

PlaneScale plane_scale(const ResponseGrid& grid, Plane plane) {
  const auto s = grid.spans();
  const auto ax = plane_axes(plane);
  return {s[ax[0] - 2], s[ax[1] - 2]};
}

namespace {

// Refines from the centre of cell (i2, i3, i4); nullopt when Newton fails.
std::optional<PiPoint> seed_from_cell(const ResponseGrid& grid,
                                      const LevelSystem& sys, cplx target,
                                      LevelFunctions g, std::size_t i2,
                                      std::size_t i3, std::size_t i4,
                                      const SeedOptions& opt) {
  int neg1 = 0;
  int neg2 = 0;
  bool valid2 = true;
  for (int c = 0; c < 8; ++c) {
    const auto& v = grid.value(i2 + (c & 1), i3 + ((c >> 1) & 1), i4 + ((c >> 2) & 1));
    const auto r = level_residuals(g, v, target);
    neg1 += r[0] < 0.0;
    neg2 += r[1] < 0.0;
    // A wrapped phase jump is not a genuine sign change.
    if (g == LevelFunctions::kMagPhase && std::abs(r[1]) > 0.5 * std::numbers::pi) {
      valid2 = false;
    }
  }
  if (neg1 == 0 || neg1 == 8 || neg2 == 0 || neg2 == 8 || !valid2) {
    return std::nullopt;
  }
  const PiPoint lo = grid.node(i2, i3, i4);
  const PiPoint hi = grid.node(i2 + 1, i3 + 1, i4 + 1);
  Vec3 x = sys.to_x({0.5 * (lo.pi2 + hi.pi2), 0.5 * (lo.pi3 + hi.pi3),
                     0.5 * (lo.pi4 + hi.pi4)});
  for (int it = 0; it < opt.max_iterations; ++it) {
    const LevelEval e = sys.eval(x);
    if (rnorm(e.r) < 1e-3 * opt.residual_tol) break;
    // Minimum-norm step: dx = -J^T (J J^T)^{-1} r.
    const double a = dot(e.jac[0], e.jac[0]);
    const double b = dot(e.jac[0], e.jac[1]);
    const double d = dot(e.jac[1], e.jac[1]);
    const double det = a * d - b * b;
    if (!(det > 1e-24 * a * d)) return std::nullopt;
    const double y0 = (d * e.r[0] - b * e.r[1]) / det;
    const double y1 = (a * e.r[1] - b * e.r[0]) / det;
    Vec3 dx{-(e.jac[0][0] * y0 + e.jac[1][0] * y1),
            -(e.jac[0][1] * y0 + e.jac[1][1] * y1),
            -(e.jac[0][2] * y0 + e.jac[1][2] * y1)};
    const double len = norm(dx);
    if (len > 0.1) dx = {dx[0] * 0.1 / len, dx[1] * 0.1 / len, dx[2] * 0.1 / len};
    for (int k = 0; k < 3; ++k) x[k] = std::clamp(x[k] + dx[k], 0.0, 1.0);
  }
  const LevelEval e = sys.eval(x);
  if (!(rnorm(e.r) < opt.residual_tol)) return std::nullopt;
  return sys.to_pi(x);
}

std::vector<PiPoint> dedup(const ResponseGrid& grid,
                           std::vector<std::optional<PiPoint>>& slots,
                           double tol) {
  std::vector<PiPoint> out;
  std::vector<Vec3> xs;
  for (const auto& s : slots) {
    if (!s) continue;
    const Vec3 x = grid.normalize(*s);
    bool dup = false;
    for (const auto& y : xs) {
      if (dist(x, y) < tol) { dup = true; break; }
    }
    if (dup) continue;
    xs.push_back(x);
    out.push_back(*s);
  }
  return out;
}

std::vector<PiPoint> seeds_impl(const ResponseGrid& grid, cplx target,
                                LevelFunctions g, const SeedOptions& opt,
                                bool parallel) {
  if (g == LevelFunctions::kMagPhase && target == 0.0) {
    throw DomainError("magnitude/phase level functions need a nonzero target");
  }
  const LevelSystem sys(grid, target, g);
  const std::size_t n2 = grid.size(0) - 1;
  const std::size_t n3 = grid.size(1) - 1;
  const std::size_t n4 = grid.size(2) - 1;
  const std::size_t cells = n2 * n3 * n4;
  std::vector<std::optional<PiPoint>> slots(cells);
  const auto body = [&](std::size_t k) {
    const std::size_t i4 = k % n4;
    const std::size_t i3 = (k / n4) % n3;
    const std::size_t i2 = k / (n4 * n3);
    slots[k] = seed_from_cell(grid, sys, target, g, i2, i3, i4, opt);
  };
  if (parallel) {
    const auto n = static_cast<long long>(cells);
#pragma omp parallel for schedule(dynamic, 256)
    for (long long k = 0; k < n; ++k) body(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < cells; ++k) body(k);
  }
  return dedup(grid, slots, opt.dedup_distance);
}

}  // namespace

std::vector<PiPoint> find_seeds(const ResponseGrid& grid,
                                std::complex<double> target, LevelFunctions g,
                                const SeedOptions& options) {
  return seeds_impl(grid, target, g, options, true);
}

std::vector<PiPoint> find_seeds_serial(const ResponseGrid& grid,
                                       std::complex<double> target,
                                       LevelFunctions g,
                                       const SeedOptions& options) {
  return seeds_impl(grid, target, g, options, false);
}

std::optional<std::array<double, 3>> curve_tangent(const ResponseGrid& grid,
                                                   const PiPoint& p,
                                                   LevelFunctions g,
                                                   std::complex<double> target) {
  const LevelSystem sys(grid, target, g);
  return unit_tangent(sys.eval(sys.to_x(p)));
}

Polyline3 trace_curve(const ResponseGrid& grid, const PiPoint& seed,
                      std::complex<double> target, LevelFunctions g,
                      const CurveTag& tag, const TraceOptions& options) {
  if (!grid.contains(seed)) throw DomainError("seed lies outside the database range");
  const LevelSystem sys(grid, target, g);
  const Vec3 x0 = sys.to_x(seed);
  const LevelEval e0 = sys.eval(x0);
  if (!(rnorm(e0.r) < 1e-8)) {
    std::ostringstream msg;
    msg << "seed does not satisfy the level equations (residual " << rnorm(e0.r)
        << ")";
    throw DomainError(msg.str());
  }
  Polyline3 out;
  out.tag = tag;
  const auto t0 = unit_tangent(e0);
  if (!t0) {
    out.points.push_back(seed);
    out.status = TraceStatus::kSingular;
    out.diagnostic = "level-function gradients are parallel at the seed";
    return out;
  }
  const Walk fwd = walk(sys, x0, *t0, options);
  std::vector<Vec3> pts;
  if (fwd.closed) {
    pts = fwd.points;
    out.closed = true;
    out.status = fwd.status;
    out.diagnostic = fwd.diagnostic;
  } else {
    const Walk bwd = walk(sys, x0, {-(*t0)[0], -(*t0)[1], -(*t0)[2]}, options);
    pts.assign(bwd.points.rbegin(), bwd.points.rend());
    pts.insert(pts.end(), fwd.points.begin() + 1, fwd.points.end());
    out.status = bwd.status != TraceStatus::kComplete ? bwd.status : fwd.status;
    out.diagnostic = !bwd.diagnostic.empty() ? bwd.diagnostic : fwd.diagnostic;
  }
  out.points.reserve(pts.size());
  for (const auto& x : pts) out.points.push_back(sys.to_pi(x));
  return out;
}

std::vector<Polyline3> trace_all(const ResponseGrid& grid,
                                 std::complex<double> target, LevelFunctions g,
                                 const CurveTag& tag, const TraceOptions& trace,
                                 const SeedOptions& seeds) {
  const auto found = find_seeds(grid, target, g, seeds);
  if (found.empty()) {
    std::ostringstream msg;
    msg << "measurement " << (tag.id.empty() ? std::string("(unnamed)") : tag.id)
        << " with response " << target
        << " is incompatible with the database range (no compatible point)";
    throw DataError(msg.str());
  }
  std::vector<Polyline3> curves;
  std::vector<std::vector<Vec3>> norm_curves;
  for (const auto& s : found) {
    const Vec3 x = grid.normalize(s);
    bool covered = false;
    for (const auto& c : norm_curves) {
      if (point_to_polyline3(x, c) < trace.coverage_distance) {
        covered = true;
        break;
      }
    }
    if (covered) continue;
    curves.push_back(trace_curve(grid, s, target, g, tag, trace));
    norm_curves.push_back(normalised(grid, curves.back()));
  }
  return curves;
}

Polyline2 project(const Polyline3& curve, Plane plane) {
  Polyline2 out;
  out.plane = plane;
  out.tag = curve.tag;
  out.closed = curve.closed;
  out.points.reserve(curve.points.size());
  for (const auto& p : curve.points) out.points.push_back(pt2(p, plane));
  return out;
}

Polyline3 lift(const Polyline2& curve, const std::vector<double>& dropped) {
  if (dropped.size() != curve.points.size()) {
    throw DomainError("lift needs one dropped coordinate per point");
  }
  if (curve.dimensional) throw DomainError("cannot lift a dimensional curve");
  Polyline3 out;
  out.tag = curve.tag;
  out.closed = curve.closed;
  for (std::size_t i = 0; i < dropped.size(); ++i) {
    const auto& q = curve.points[i];
    switch (curve.plane) {
      case Plane::kPi2Pi3: out.points.push_back({q.x, q.y, dropped[i]}); break;
      case Plane::kPi3Pi4: out.points.push_back({dropped[i], q.x, q.y}); break;
      case Plane::kPi2Pi4: out.points.push_back({q.x, dropped[i], q.y}); break;
    }
  }
  return out;
}

Interval project_axis(const Polyline3& curve, int pi_index) {
  if (pi_index < 2 || pi_index > 4) throw DomainError("pi index must be 2, 3 or 4");
  if (curve.points.empty()) throw DomainError("cannot project an empty curve");
  Interval iv{std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
  for (const auto& p : curve.points) {
    const double v = pi_index == 2 ? p.pi2 : pi_index == 3 ? p.pi3 : p.pi4;
    iv.lo = std::min(iv.lo, v);
    iv.hi = std::max(iv.hi, v);
  }
  return iv;
}

Polyline2 to_dimensional(const Polyline2& curve, double characteristic_length) {
  if (curve.dimensional) throw DomainError("curve is already dimensional");
  if (curve.plane == Plane::kPi3Pi4) {
    throw DomainError("only pi2-pi3 and pi2-pi4 curves map to a conductivity plane");
  }
  if (!(curve.tag.omega > 0.0)) {
    throw DomainError("curve has no generating frequency; cannot map pi2 to sigma");
  }
  Polyline2 out = curve;
  out.dimensional = true;
  for (auto& p : out.points) {
    p.x = sigma_from_pi2(p.x, curve.tag.omega, characteristic_length);
    p.y *= characteristic_length;
  }
  return out;
}

std::vector<Intersection> intersect_curves(const Polyline2& a, const Polyline2& b,
                                           const PlaneScale& scale, double tol) {
  return intersect_curves(std::vector<Polyline2>{a}, std::vector<Polyline2>{b},
                          scale, tol);
}

std::vector<Intersection> intersect_curves(const std::vector<Polyline2>& a,
                                           const std::vector<Polyline2>& b,
                                           const PlaneScale& scale, double tol) {
  if (a.empty() || b.empty()) throw DomainError("intersection needs nonempty curves");
  std::vector<Intersection> raw;
  for (const auto& ca : a) {
    const auto sa = scaled(ca, scale);
    for (const auto& cb : b) raw_crossings(sa, scaled(cb, scale), raw);
  }
  auto out = cluster(std::move(raw), tol);
  for (auto& c : out) {
    c.point.x *= scale.sx;
    c.point.y *= scale.sy;
  }
  return out;
}

double distance_to_curve(const Point2& p, const Polyline2& curve,
                         const PlaneScale& scale) {
  return point_to_scaled({p.x / scale.sx, p.y / scale.sy}, scaled(curve, scale));
}

double distance_to_curves(const Point2& p, const std::vector<Polyline2>& curves,
                          const PlaneScale& scale) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) best = std::min(best, distance_to_curve(p, c, scale));
  return best;
}

CommonPoint common_point(const std::vector<std::vector<Polyline2>>& sets,
                         const PlaneScale& scale, double tol) {
  constexpr double kRivalRatio = 10.0;
  if (sets.size() < 2) throw DomainError("common point needs at least two curves");
  for (const auto& s : sets) {
    if (s.empty()) throw DomainError("common point needs nonempty curve sets");
  }
  // Pairwise crossings plus, for three or more sets, centroids of crossing
  // triples (the natural estimate when noise splits a common point).
  struct PairHits {
    std::size_t i, j;
    std::vector<Intersection> hits;
  };
  std::vector<PairHits> pairs;
  std::vector<Point2> cands;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      pairs.push_back({i, j, intersect_curves(sets[i], sets[j], scale, tol)});
      for (const auto& h : pairs.back().hits) cands.push_back(h.point);
    }
  }
  if (sets.size() >= 3) {
    std::vector<Point2> extra;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      for (std::size_t b = a + 1; b < pairs.size(); ++b) {
        for (std::size_t c = b + 1; c < pairs.size(); ++c) {
          for (const auto& pa : pairs[a].hits) {
            for (const auto& pb : pairs[b].hits) {
              for (const auto& pc : pairs[c].hits) {
                extra.push_back({(pa.point.x + pb.point.x + pc.point.x) / 3.0,
                                 (pa.point.y + pb.point.y + pc.point.y) / 3.0});
              }
            }
          }
        }
      }
    }
    cands.insert(cands.end(), extra.begin(), extra.end());
  }

  std::vector<std::ptrdiff_t> order;
  std::vector<double> score(cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k) {
    double worst = 0.0;
    for (const auto& s : sets) worst = std::max(worst, distance_to_curves(cands[k], s, scale));
    score[k] = worst;
    order.push_back(static_cast<std::ptrdiff_t>(k));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return score[a] < score[b]; });

  std::vector<CandidatePoint> diag;
  for (const auto k : order) diag.push_back({cands[k].x, cands[k].y});
  if (order.empty() || !(score[order.front()] < tol)) {
    std::ostringstream msg;
    msg << "no point is shared by all " << sets.size() << " curves within "
        << tol << " (best " << (order.empty() ? 0.0 : score[order.front()])
        << "); add measurements at further frequencies";
    throw AmbiguityError(msg.str(), diag);
  }
  // A separated candidate that fits all curves about as well as the best one
  // is a rival solution. Near-tangent curves can run within tol of each other
  // far from the true point, so mere acceptability is not enough.
  const Point2 best = cands[order.front()];
  const double rival_limit =
      std::min(tol, kRivalRatio * std::max(score[order.front()], 1e-3 * tol));
  for (const auto k : order) {
    if (!(score[k] < rival_limit)) break;
    const double sep = std::hypot((cands[k].x - best.x) / scale.sx,
                                  (cands[k].y - best.y) / scale.sy);
    if (sep > 10.0 * tol) {
      std::ostringstream msg;
      msg << "curves share more than one point within " << tol
          << "; add measurements at further frequencies";
      throw AmbiguityError(msg.str(), diag);
    }
  }

  CommonPoint out;
  out.point = best;
  out.candidates = cands.size();
  for (const auto& s : sets) out.distances.push_back(distance_to_curves(best, s, scale));
  out.max_distance = score[order.front()];
  for (const auto& p : pairs) {
    if (p.hits.empty()) continue;
    const Intersection* near = &p.hits.front();
    double nd = std::numeric_limits<double>::infinity();
    for (const auto& h : p.hits) {
      const double d = std::hypot((h.point.x - best.x) / scale.sx,
                                  (h.point.y - best.y) / scale.sy);
      if (d < nd) { nd = d; near = &h; }
    }
    out.pairwise.push_back(near->point);
    out.pairwise_angles.push_back(near->angle);
  }
  for (const auto& q : out.pairwise) {
    out.pairwise_mean.x += q.x / static_cast<double>(out.pairwise.size());
    out.pairwise_mean.y += q.y / static_cast<double>(out.pairwise.size());
  }
  return out;
}

double hausdorff(const Polyline2& a, const Polyline2& b, const PlaneScale& scale) {
  return hausdorff(std::vector<Polyline2>{a}, std::vector<Polyline2>{b}, scale);
}

double hausdorff(const std::vector<Polyline2>& a, const std::vector<Polyline2>& b,
                 const PlaneScale& scale) {
  std::vector<std::vector<Point2>> sa;
  std::vector<std::vector<Point2>> sb;
  for (const auto& c : a) sa.push_back(scaled(c, scale));
  for (const auto& c : b) sb.push_back(scaled(c, scale));
  auto one_way = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& c : from) {
      for (const auto& p : c) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& d : to) best = std::min(best, point_to_scaled(p, d));
        worst = std::max(worst, best);
      }
    }
    return worst;
  };
  return std::max(one_way(sa, sb), one_way(sb, sa));
}

double overlap_hausdorff(const std::vector<Polyline2>& a,
                         const std::vector<Polyline2>& b, const PlaneScale& scale) {
  auto box = [](const std::vector<Polyline2>& set) {
    std::array<double, 4> bb{std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()};
    for (const auto& c : set) {
      for (const auto& p : c.points) {
        bb[0] = std::min(bb[0], p.x);
        bb[1] = std::max(bb[1], p.x);
        bb[2] = std::min(bb[2], p.y);
        bb[3] = std::max(bb[3], p.y);
      }
    }
    return bb;
  };
  const auto ba = box(a);
  const auto bb = box(b);
  const double x0 = std::max(ba[0], bb[0]);
  const double x1 = std::min(ba[1], bb[1]);
  const double y0 = std::max(ba[2], bb[2]);
  const double y1 = std::min(ba[3], bb[3]);
  if (!(x0 <= x1 && y0 <= y1)) return std::numeric_limits<double>::infinity();
  std::vector<std::vector<Point2>> sa;
  std::vector<std::vector<Point2>> sb;
  for (const auto& c : a) sa.push_back(scaled(c, scale));
  for (const auto& c : b) sb.push_back(scaled(c, scale));
  const double lx = x0 / scale.sx, hx = x1 / scale.sx;
  const double ly = y0 / scale.sy, hy = y1 / scale.sy;
  auto one_way = [&](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& c : from) {
      for (const auto& p : c) {
        if (p.x < lx || p.x > hx || p.y < ly || p.y > hy) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& d : to) best = std::min(best, point_to_scaled(p, d));
        worst = std::max(worst, best);
      }
    }
    return worst;
  };
  return std::max(one_way(sa, sb), one_way(sb, sa));
}

double hausdorff(const ResponseGrid& grid, const Polyline3& a, const Polyline3& b) {
  return hausdorff(grid, std::vector<Polyline3>{a}, std::vector<Polyline3>{b});
}

double hausdorff(const ResponseGrid& grid, const std::vector<Polyline3>& a,
                 const std::vector<Polyline3>& b) {
  std::vector<std::vector<Vec3>> na;
  std::vector<std::vector<Vec3>> nb;
  for (const auto& c : a) na.push_back(normalised(grid, c));
  for (const auto& c : b) nb.push_back(normalised(grid, c));
  auto one_way = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& c : from) {
      for (const auto& p : c) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& d : to) best = std::min(best, point_to_polyline3(p, d));
        worst = std::max(worst, best);
      }
    }
    return worst;
  };
  return std::max(one_way(na, nb), one_way(nb, na));
}

double distance_to_curves(const ResponseGrid& grid, const PiPoint& p,
                          const std::vector<Polyline3>& curves) {
  const Vec3 x = grid.normalize(p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) best = std::min(best, point_to_polyline3(x, normalised(grid, c)));
  return best;
}

void write_curve_csv(std::ostream& out, const ResponseGrid& grid,
                     const std::vector<Polyline3>& curves,
                     std::complex<double> target, LevelFunctions g) {
  out << "s,pi2,pi3,pi4,residual1,residual2,curve\n";
  out.precision(12);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    double s = 0.0;
    Vec3 prev{};
    for (std::size_t i = 0; i < curves[k].points.size(); ++i) {
      const auto& p = curves[k].points[i];
      const Vec3 x = grid.normalize(p);
      if (i > 0) s += dist(x, prev);
      prev = x;
      const auto r = level_residuals(g, grid.interpolate(p), target);
      out << s << ',' << p.pi2 << ',' << p.pi3 << ',' << p.pi4 << ',' << r[0]
          << ',' << r[1] << ',' << k << '\n';
    }
  }
}

}  // namespace ectpi

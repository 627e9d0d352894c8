#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "berrydyn/errors.hpp"
#include "berrydyn/linalg.hpp"
#include "berrydyn/model.hpp"

namespace berrydyn {

struct ConnectionResult {
  Vec2 value;            // A_n = i<phi_n| d/dq |phi_n>, real part (1/length)
  double imag_residual;  // |Re <phi_n|d phi_n>|, ideally 0; an error estimate
};

namespace detail {

inline void check_anchor(const EigenFrame& f, std::size_t band, const char* where) {
  if (band >= f.dim()) throw ValidationError("band index out of range");
  if (f.gauge_anchor.magnitude.size() > band && f.gauge_anchor.magnitude[band] < 1e-8) {
    throw GaugeSingularError(std::string("gauge anchor component underflows at ") + where);
  }
}

}  // namespace detail

// Central-difference Berry connection in the model's smooth gauge.
template <HybridModel M>
ConnectionResult berry_connection(const M& model, Vec2 q, std::size_t band, double h = 0.0) {
  if (h <= 0.0) h = 1e-6 * model.length_scale();
  const EigenFrame f0 = model.eigenframe(q);
  detail::check_anchor(f0, band, "center");

  cplx z[2];
  const Vec2 steps[2] = {Vec2{h, 0.0}, Vec2{0.0, h}};
  for (int j = 0; j < 2; ++j) {
    const EigenFrame fp = model.eigenframe(q + steps[j]);
    const EigenFrame fm = model.eigenframe(q - steps[j]);
    detail::check_anchor(fp, band, "neighbor");
    detail::check_anchor(fm, band, "neighbor");
    const cplx op = inner(f0.states[band], fp.states[band]);
    const cplx om = inner(f0.states[band], fm.states[band]);
    z[j] = (op - om) / (2.0 * h);
  }
  // A = i z with z = <phi|d phi> purely imaginary; Re z is the residual
  ConnectionResult r;
  r.value = Vec2{-z[0].imag(), -z[1].imag()};
  r.imag_residual = std::max(std::abs(z[0].real()), std::abs(z[1].real()));
  return r;
}

// Abar = sum_n I_n A_n  (action units x 1/length = momentum units).
inline Vec2 weighted_potential(std::span<const Vec2> connections, std::span<const double> actions) {
  if (connections.size() != actions.size()) {
    throw ValidationError("weighted_potential: per-band sizes disagree");
  }
  Vec2 abar{0.0, 0.0};
  for (std::size_t n = 0; n < connections.size(); ++n) abar += actions[n] * connections[n];
  return abar;
}

// Population-weighted curvature from the gauge-invariant plaquette
//   B_n delta^2 = -Im log prod of the four overlaps around the square,
// second-order accurate in delta.
template <HybridModel M>
double curvature_numeric(const M& model, Vec2 q, std::span<const double> actions, double delta) {
  const EigenFrame f00 = model.eigenframe(q);
  const EigenFrame f10 = model.eigenframe(q + Vec2{delta, 0.0});
  const EigenFrame f11 = model.eigenframe(q + Vec2{delta, delta});
  const EigenFrame f01 = model.eigenframe(q + Vec2{0.0, delta});

  const std::size_t n = f00.dim();
  if (actions.size() != n) throw ValidationError("curvature_numeric: actions size mismatch");

  double curv = 0.0;
  for (std::size_t band = 0; band < n; ++band) {
    const cplx o1 = inner(f00.states[band], f10.states[band]);
    const cplx o2 = inner(f10.states[band], f11.states[band]);
    const cplx o3 = inner(f11.states[band], f01.states[band]);
    const cplx o4 = inner(f01.states[band], f00.states[band]);
    for (const cplx& o : {o1, o2, o3, o4}) {
      if (std::abs(o) < 0.5) {
        throw DegenerateError("plaquette overlap magnitude below 0.5; plaquette too coarse");
      }
    }
    const double phase = std::arg(o1 * o2 * o3 * o4);
    curv += actions[band] * (-phase) / (delta * delta);
  }
  return curv;
}

// One Richardson halving of the O(delta^2) plaquette value.
template <HybridModel M>
double curvature_richardson(const M& model, Vec2 q, std::span<const double> actions, double delta) {
  const double v1 = curvature_numeric(model, q, actions, delta);
  const double v2 = curvature_numeric(model, q, actions, 0.5 * delta);
  return (4.0 * v2 - v1) / 3.0;
}

// Closed discretized path in the plane; first and last point must coincide
// exactly.
struct LoopPath {
  std::vector<Vec2> points;
  std::size_t band = 0;
};

inline LoopPath make_circle_loop(Vec2 center, double radius, std::size_t n_points,
                                 std::size_t band) {
  LoopPath path;
  path.band = band;
  path.points.reserve(n_points + 1);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_points);
    path.points.push_back(center + Vec2{radius * std::cos(a), radius * std::sin(a)});
  }
  path.points.push_back(path.points.front());
  return path;
}

struct LoopPhase {
  double phase = 0.0;       // principal value in (-pi, pi]
  double unwrapped = 0.0;   // running sum of segment phases
  int winding = 0;
  bool winding_resolved = true;
  std::size_t n_points = 0;
};

namespace detail {

inline double loop_signed_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    a += pts[k].x * pts[k + 1].y - pts[k + 1].x * pts[k].y;
  }
  return 0.5 * a;
}

}  // namespace detail

// Geometric phase of the angle variable around the loop,
//   gamma_n = -closed-integral A_n . dq,
// from the Bargmann overlap product (gauge invariant). Computed in canonical
// (counterclockwise) orientation so that reversing a path negates the result
// exactly.
template <HybridModel M>
LoopPhase berry_phase_loop(const M& model, const LoopPath& path) {
  const std::vector<Vec2>& pts = path.points;
  if (pts.size() < 4) throw ValidationError("loop needs at least 3 distinct points");
  if (pts.front().x != pts.back().x || pts.front().y != pts.back().y) {
    throw ValidationError("loop is not closed exactly");
  }
  const double bound = 0.1 * model.length_scale();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if ((pts[k + 1] - pts[k]).norm() > bound) {
      throw ValidationError("loop spacing exceeds the declared discretization bound");
    }
  }

  const bool reversed = detail::loop_signed_area(pts) < 0.0;
  const std::size_t m = pts.size() - 1;  // segments
  auto point = [&](std::size_t k) -> const Vec2& { return reversed ? pts[m - k] : pts[k]; };

  std::vector<EigenFrame> frames;
  frames.reserve(m);
  for (std::size_t k = 0; k < m; ++k) frames.push_back(model.eigenframe(point(k)));

  double total = 0.0;
  bool resolved = true;
  for (std::size_t k = 0; k < m; ++k) {
    const EigenFrame& a = frames[k];
    const EigenFrame& b = frames[(k + 1) % m];
    const cplx o = inner(a.states[path.band], b.states[path.band]);
    if (std::abs(o) < 0.5) {
      throw DegenerateError("loop overlap magnitude below 0.5; refine the path");
    }
    const double seg = std::arg(o);
    if (std::abs(seg) >= 0.25 * std::numbers::pi) resolved = false;
    total += seg;
  }

  LoopPhase out;
  out.n_points = m;
  out.unwrapped = reversed ? -total : total;
  double principal = std::remainder(out.unwrapped, 2.0 * std::numbers::pi);
  if (principal <= -std::numbers::pi) principal += 2.0 * std::numbers::pi;
  out.phase = principal;
  out.winding = static_cast<int>(std::llround((out.unwrapped - principal) / (2.0 * std::numbers::pi)));
  out.winding_resolved = resolved;
  return out;
}

// Circle loop with refinement: points double until the phase moves by less
// than `tol` (at least 512 points to start).
template <HybridModel M>
LoopPhase berry_phase_circle(const M& model, Vec2 center, double radius, std::size_t band,
                             std::size_t n0 = 512, double tol = 1e-8, int max_doublings = 8) {
  std::size_t n = n0 < 512 ? 512 : n0;
  LoopPhase prev = berry_phase_loop(model, make_circle_loop(center, radius, n, band));
  for (int i = 0; i < max_doublings; ++i) {
    n *= 2;
    LoopPhase next = berry_phase_loop(model, make_circle_loop(center, radius, n, band));
    const bool converged = std::abs(next.unwrapped - prev.unwrapped) < tol;
    prev = next;
    if (converged) break;
  }
  return prev;
}

// Angle-variable rate Theta_dot_n = E_n(q)/hbar - A_n . qdot. The actions do
// not enter for a linear fast subsystem (H1 = sum E_n I_n / hbar); the
// parameter is kept for signature parity with the other averaged quantities.
template <HybridModel M>
double angle_rate(const M& model, Vec2 q, Vec2 qdot, [[maybe_unused]] std::span<const double> actions,
                  std::size_t band, double h = 0.0) {
  const EigenFrame f = model.eigenframe(q);
  if (band >= f.dim()) throw ValidationError("band index out of range");
  const double dynamical = f.energies[band] / model.hbar();
  if (qdot.x == 0.0 && qdot.y == 0.0) return dynamical;
  const ConnectionResult a = berry_connection(model, q, band, h);
  return dynamical - dot(a.value, qdot);
}

}  // namespace berrydyn

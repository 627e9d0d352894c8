#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "berrydyn/errors.hpp"
#include "berrydyn/fulldyn.hpp"
#include "berrydyn/geometry.hpp"
#include "berrydyn/linalg.hpp"
#include "berrydyn/model.hpp"

namespace berrydyn {

// Slow-particle state under the averaged dynamics; the actions are frozen
// parameters, not dynamical variables.
struct EffectiveState {
  Vec2 q2;
  Vec2 v2;
  std::vector<double> actions;
  double t = 0.0;
};

struct EffectiveTrajectory {
  std::vector<EffectiveState> samples;
  std::vector<double> energies;
  double max_local_error = 0.0;
};

template <class M>
concept HasSpinClosedForms = requires(const M& m, double r, double d) {
  { m.gradient_coefficient(r, d) } -> std::convertible_to<double>;
  { m.curvature_closed_form(r, d) } -> std::convertible_to<double>;
  { m.aligned_band() } -> std::convertible_to<int>;
};

namespace detail {

// (|a_-|^2 - |a_+|^2) from frame-ordered actions.
template <HasSpinClosedForms M>
double pop_diff_minus_plus(const M& model, std::span<const double> actions) {
  const int a = model.aligned_band();
  return (actions[1 - a] - actions[a]) / model.hbar();
}

}  // namespace detail

// H1(I, q) = sum_n E_n(q) I_n / hbar.
template <HybridModel M>
double averaged_quantum_energy(const M& model, Vec2 q, std::span<const double> actions) {
  const EigenFrame f = model.eigenframe(q);
  double e = 0.0;
  for (std::size_t n = 0; n < f.dim(); ++n) e += f.energies[n] * actions[n];
  return e / model.hbar();
}

template <HybridModel M>
double effective_energy(const EffectiveState& s, const M& model) {
  return averaged_quantum_energy(model, s.q2, s.actions) +
         0.5 * model.mass() * s.v2.norm2() + model.potential(s.q2);
}

// Gradient force plus the Lorentz-like curvature force qdot x B.
template <HybridModel M>
Vec2 effective_force(const EffectiveState& s, const M& model) {
  Vec2 grad;
  double curv;
  if constexpr (HasSpinClosedForms<M>) {
    const double r = s.q2.norm();
    const double dmp = detail::pop_diff_minus_plus(model, s.actions);
    grad = model.gradient_coefficient(r, dmp) * s.q2;
    curv = model.curvature_closed_form(r, -dmp);
  } else {
    const double h = 1e-6 * model.length_scale();
    const double ep_x = averaged_quantum_energy(model, s.q2 + Vec2{h, 0.0}, s.actions);
    const double em_x = averaged_quantum_energy(model, s.q2 - Vec2{h, 0.0}, s.actions);
    const double ep_y = averaged_quantum_energy(model, s.q2 + Vec2{0.0, h}, s.actions);
    const double em_y = averaged_quantum_energy(model, s.q2 - Vec2{0.0, h}, s.actions);
    grad = Vec2{-(ep_x - em_x) / (2.0 * h), -(ep_y - em_y) / (2.0 * h)};
    curv = curvature_richardson(model, s.q2, s.actions, 1e-4 * model.length_scale());
  }
  const Vec2 lorentz = curv * Vec2{s.v2.y, -s.v2.x};
  return grad + lorentz - model.potential_gradient(s.q2);
}

struct EffectiveStepControl {
  double dt = 0.0;                  // 0 derives one from the gradient-force rate
  int steps_per_slow_period = 1024;
  double local_error_tol = 1e-6;
  bool estimate_local_error = true;
};

template <HybridModel M>
double default_effective_timestep(const M& model, const EffectiveState& s,
                                  int steps_per_slow_period = 1024) {
  double omega = 0.0;
  const double r_ref = std::max(s.q2.norm(), model.length_scale());
  if constexpr (HasSpinClosedForms<M>) {
    double dmp = detail::pop_diff_minus_plus(model, s.actions);
    if (dmp == 0.0) dmp = 1.0;
    omega = std::sqrt(std::abs(model.gradient_coefficient(r_ref, dmp)) / model.mass());
  } else {
    const double h = 1e-6 * model.length_scale();
    const Vec2 q{r_ref, 0.0};
    const double ep = averaged_quantum_energy(model, q + Vec2{h, 0.0}, s.actions);
    const double em = averaged_quantum_energy(model, q - Vec2{h, 0.0}, s.actions);
    omega = std::sqrt(std::abs((ep - em) / (2.0 * h)) / (model.mass() * r_ref));
  }
  if (!(omega > 0.0)) throw ValidationError("no slow frequency scale for effective stepping");
  return 2.0 * std::numbers::pi / omega / steps_per_slow_period;
}

namespace detail {

struct EffStateVec {
  Vec2 q, v;
  void add_scaled(const EffStateVec& o, double a) {
    q += a * o.q;
    v += a * o.v;
  }
  bool finite() const {
    return std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(v.x) && std::isfinite(v.y);
  }
};

template <HybridModel M>
class EffectiveStepper {
 public:
  EffectiveStepper(const M& model, std::span<const double> actions, EffectiveStepControl ctrl)
      : model_(model), actions_(actions.begin(), actions.end()), ctrl_(ctrl) {}

  double max_local_error = 0.0;

  void rhs(const EffStateVec& s, EffStateVec& out) const {
    out.q = s.v;
    const EffectiveState es{s.q, s.v, actions_, 0.0};
    out.v = effective_force(es, model_) / model_.mass();
  }

  void rk4(const EffStateVec& y, double dt, EffStateVec& out) const {
    EffStateVec k1, k2, k3, k4, tmp;
    rhs(y, k1);
    tmp = y;
    tmp.add_scaled(k1, 0.5 * dt);
    rhs(tmp, k2);
    tmp = y;
    tmp.add_scaled(k2, 0.5 * dt);
    rhs(tmp, k3);
    tmp = y;
    tmp.add_scaled(k3, dt);
    rhs(tmp, k4);
    out = y;
    out.add_scaled(k1, dt / 6.0);
    out.add_scaled(k2, dt / 3.0);
    out.add_scaled(k3, dt / 3.0);
    out.add_scaled(k4, dt / 6.0);
  }

  void advance(EffStateVec& y, double dt) {
    EffStateVec full;
    rk4(y, dt, full);
    if (ctrl_.estimate_local_error) {
      EffStateVec half, two;
      rk4(y, 0.5 * dt, half);
      rk4(half, 0.5 * dt, two);
      const double est = std::sqrt((full.q - two.q).norm2() + (full.v - two.v).norm2());
      max_local_error = std::max(max_local_error, est);
      const double scale = std::max(std::sqrt(y.q.norm2() + y.v.norm2()), 1.0);
      if (est > ctrl_.local_error_tol * scale) {
        throw StepTooLargeError("effective local error estimate " + std::to_string(est) +
                                " exceeds tolerance at dt = " + std::to_string(dt));
      }
    }
    if (!full.finite()) throw NonFiniteError("effective state left the finite range");
    y = full;
  }

 private:
  const M& model_;
  std::vector<double> actions_;
  EffectiveStepControl ctrl_;
};

}  // namespace detail

template <HybridModel M>
EffectiveTrajectory integrate_effective(const M& model, const EffectiveState& initial,
                                        double t_final, std::span<const double> output_times,
                                        EffectiveStepControl ctrl = {}) {
  const double t0 = initial.t;
  const double dir = t_final >= t0 ? 1.0 : -1.0;

  std::vector<double> targets(output_times.begin(), output_times.end());
  if (targets.empty()) targets.push_back(t_final);
  double prev = t0;
  for (double t : targets) {
    if (dir * (t - prev) < 0.0 || dir * (t_final - t) < 0.0) {
      throw ValidationError("output_times must move monotonically from t0 to t_final");
    }
    prev = t;
  }

  const double dt = ctrl.dt > 0.0
                        ? ctrl.dt
                        : default_effective_timestep(model, initial, ctrl.steps_per_slow_period);

  EffectiveTrajectory traj;
  detail::EffectiveStepper<M> stepper(model, initial.actions, ctrl);
  detail::EffStateVec y{initial.q2, initial.v2};
  double t = t0;

  auto emit = [&](double at) {
    EffectiveState s{y.q, y.v, initial.actions, at};
    traj.energies.push_back(effective_energy(s, model));
    traj.samples.push_back(std::move(s));
  };

  for (double target : targets) {
    const double span = target - t;
    if (span != 0.0) {
      const auto n = static_cast<std::uint64_t>(std::ceil(std::abs(span) / dt - 1e-12));
      const double h = span / static_cast<double>(std::max<std::uint64_t>(n, 1));
      for (std::uint64_t i = 0; i < std::max<std::uint64_t>(n, 1); ++i) stepper.advance(y, h);
      t = target;
    }
    emit(target);
  }

  traj.max_local_error = stepper.max_local_error;
  return traj;
}

// Clockwise/anticlockwise circulation at fixed radius, from the force balance
//   M w^2 r = |F_radial| -/+ B w r  (signed form: M w^2 + B w + C = 0).
struct FrequencySplitReport {
  double radius = 0.0;          // m
  double nu_cw = 0.0;           // Hz
  double nu_ccw = 0.0;          // Hz
  double delta_nu = 0.0;        // Hz, nu_cw - nu_ccw = B / (2 pi M)
  double curvature_at_r = 0.0;  // kg/s
};

template <HasSpinClosedForms M>
FrequencySplitReport frequency_split(const M& model, double r, std::span<const double> actions) {
  if (!(r > 0.0)) throw ValidationError("frequency_split: r must be > 0");
  const double dmp = detail::pop_diff_minus_plus(model, actions);
  const double coef = model.gradient_coefficient(r, dmp);  // radial force = coef * r
  const double curv = model.curvature_closed_form(r, -dmp);
  if (coef > 0.0) {
    throw NoOrbitError("radial force is repulsive at r; no circular orbit for these populations");
  }
  const double m = model.mass();
  const double disc = std::sqrt(curv * curv - 4.0 * m * coef);
  const double w_ccw = (-curv + disc) / (2.0 * m);  // >= 0
  const double w_cw = (-curv - disc) / (2.0 * m);   // <= 0

  FrequencySplitReport rep;
  rep.radius = r;
  rep.nu_ccw = w_ccw / (2.0 * std::numbers::pi);
  rep.nu_cw = -w_cw / (2.0 * std::numbers::pi);
  rep.delta_nu = curv / (2.0 * std::numbers::pi * m);
  rep.curvature_at_r = curv;
  return rep;
}

}  // namespace berrydyn

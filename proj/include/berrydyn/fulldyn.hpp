#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "berrydyn/errors.hpp"
#include "berrydyn/linalg.hpp"
#include "berrydyn/model.hpp"
#include "berrydyn/quantum.hpp"

namespace berrydyn {

// Full phase point of the coupled system, no adiabatic approximation.
struct HybridState {
  QuantumState psi;
  Vec2 q2;
  Vec2 p2;
  double t = 0.0;
};

struct SampleDiagnostics {
  double energy = 0.0;
  double norm = 0.0;
  std::vector<double> actions;
};

// Accumulated over a run. Norm drift is a primary error signal: the stepper
// measures it every step and renormalizes only above threshold, counting
// each event.
struct StepDiagnostics {
  std::uint64_t steps = 0;
  std::uint64_t renormalizations = 0;
  double max_norm_drift = 0.0;   // max |  ||psi|| - 1 | seen before renormalizing
  double max_local_error = 0.0;  // max per-step error estimate (joint norm)
};

struct HybridTrajectory {
  std::vector<HybridState> samples;
  std::vector<SampleDiagnostics> diagnostics;
  StepDiagnostics stepping;
};

struct StepControl {
  double dt = 0.0;                  // fixed step; 0 derives it from the fast period at q2(0)
  int steps_per_fast_period = 64;
  double local_error_tol = 1e-6;    // STEP_TOO_LARGE above this (relative, joint norm)
  double renorm_threshold = 1e-12;
  bool estimate_local_error = true;
};

template <HybridModel M>
double total_energy(const HybridState& s, const M& model) {
  return model.hamiltonian(s.q2).expectation(s.psi.amps()) +
         s.p2.norm2() / (2.0 * model.mass()) + model.potential(s.q2);
}

template <HybridModel M>
double default_timestep(const M& model, Vec2 q0, int steps_per_fast_period = 64) {
  const double wf = fast_frequency(model, q0);
  if (!(wf > 0.0)) throw ValidationError("fast frequency vanishes; no timescale for stepping");
  return 2.0 * std::numbers::pi / wf / steps_per_fast_period;
}

namespace detail {

struct JointState {
  cvec psi;
  Vec2 q;
  Vec2 p;

  void add_scaled(const JointState& o, double a) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += a * o.psi[i];
    q += a * o.q;
    p += a * o.p;
  }

  bool finite() const {
    for (const cplx& z : psi)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(p.x) && std::isfinite(p.y);
  }
};

inline double joint_norm(const JointState& s) {
  return std::sqrt(norm2(s.psi) + s.q.norm2() + s.p.norm2());
}

inline double joint_dist(const JointState& a, const JointState& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i) s += std::norm(a.psi[i] - b.psi[i]);
  s += (a.q - b.q).norm2() + (a.p - b.p).norm2();
  return std::sqrt(s);
}

// Classical RK4 on the joint vector (Re psi, Im psi, q2, p2). The optional
// error estimate compares one full step against two half steps.
template <HybridModel M>
class Stepper {
 public:
  Stepper(const M& model, StepControl ctrl) : model_(model), ctrl_(ctrl) {}

  const StepDiagnostics& diagnostics() const { return diag_; }
  StepDiagnostics& diagnostics() { return diag_; }

  void rhs(const JointState& s, JointState& out) const {
    out.psi = schrodinger_rhs(std::span<const cplx>(s.psi), s.q, model_);
    out.q = s.p / model_.mass();
    out.p = mean_field_force(model_, s.psi, s.q) - model_.potential_gradient(s.q);
  }

  void rk4(const JointState& y, double dt, JointState& out) const {
    JointState k1, k2, k3, k4, tmp;
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

  void advance(JointState& y, double dt) {
    JointState full;
    rk4(y, dt, full);

    if (ctrl_.estimate_local_error) {
      JointState half, two;
      rk4(y, 0.5 * dt, half);
      rk4(half, 0.5 * dt, two);
      const double est = joint_dist(full, two);
      diag_.max_local_error = std::max(diag_.max_local_error, est);
      if (est > ctrl_.local_error_tol * std::max(joint_norm(y), 1.0)) {
        throw StepTooLargeError("local error estimate " + std::to_string(est) +
                                " exceeds tolerance at dt = " + std::to_string(dt));
      }
    }

    if (!full.finite()) throw NonFiniteError("state left the finite range during a step");

    const double n = vnorm(full.psi);
    const double drift = std::abs(n - 1.0);
    diag_.max_norm_drift = std::max(diag_.max_norm_drift, drift);
    if (drift > ctrl_.renorm_threshold) {
      for (auto& z : full.psi) z /= n;
      ++diag_.renormalizations;
    }
    ++diag_.steps;
    y = std::move(full);
  }

 private:
  const M& model_;
  StepControl ctrl_;
  StepDiagnostics diag_;
};

template <HybridModel M>
SampleDiagnostics sample_diagnostics(const HybridState& s, const M& model) {
  SampleDiagnostics d;
  d.energy = total_energy(s, model);
  d.norm = s.psi.norm();
  try {
    const EigenFrame frame = model.eigenframe(s.q2);
    d.actions = to_action_angle(s.psi, frame, model.hbar()).actions;
  } catch (const DegenerateError&) {
    // no resolvable eigenframe (e.g. mu = 0): populations in the fixed basis
    d.actions.resize(s.psi.dim());
    for (std::size_t i = 0; i < s.psi.dim(); ++i)
      d.actions[i] = model.hbar() * std::norm(s.psi.amps()[i]);
  }
  return d;
}

}  // namespace detail

// One fixed step of the coupled system.
template <HybridModel M>
HybridState step(const HybridState& s, double dt, const M& model, StepControl ctrl = {},
                 StepDiagnostics* diag_out = nullptr) {
  if (dt == 0.0 || !std::isfinite(dt)) throw ValidationError("step: dt must be nonzero and finite");
  detail::Stepper<M> stepper(model, ctrl);
  detail::JointState y{s.psi.amps(), s.q2, s.p2};
  stepper.advance(y, dt);
  if (diag_out) *diag_out = stepper.diagnostics();
  return HybridState{QuantumState(std::move(y.psi)), y.q, y.p, s.t + dt};
}

// Dense fixed-step integration with exact (interpolation-free) landing on the
// requested output times. Backward runs (t_final < t0) are supported for
// reversibility checks; output times must then decrease toward t_final.
template <HybridModel M>
HybridTrajectory integrate(const M& model, const HybridState& initial, double t_final,
                           std::span<const double> output_times, StepControl ctrl = {}) {
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

  double dt = ctrl.dt > 0.0 ? ctrl.dt : default_timestep(model, initial.q2, ctrl.steps_per_fast_period);

  HybridTrajectory traj;
  detail::Stepper<M> stepper(model, ctrl);
  detail::JointState y{initial.psi.amps(), initial.q2, initial.p2};
  double t = t0;

  auto emit = [&](double at) {
    HybridState s{QuantumState(y.psi), y.q, y.p, at};
    traj.diagnostics.push_back(detail::sample_diagnostics(s, model));
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

  traj.stepping = stepper.diagnostics();
  return traj;
}

}  // namespace berrydyn

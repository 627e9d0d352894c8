#pragma once

#include <array>
#include <cmath>

#include "berrydyn/berrydyn.hpp"

namespace testutil {

using namespace berrydyn;

// Internal-unit spin-dipole model calibrated to a fast/slow ratio at r_ref.
inline SpinDipoleModel ratio_model(double eta, double r_ref, double imbalance = 1.0) {
  return SpinDipoleModel(params_for_timescale_ratio(ModelParams{}, eta, r_ref, imbalance));
}

// Signed circular-orbit rate (ccw positive root).
inline double orbit_rate(const SpinDipoleModel& m, double r0, std::span<const double> actions,
                         bool ccw = true) {
  return berrydyn::detail::orbit_omega(m, r0, actions, ccw);
}

// Physical [P+, P-] to frame-ordered actions.
inline std::vector<double> actions_of(const SpinDipoleModel& m, std::array<double, 2> pops) {
  return berrydyn::detail::frame_actions(m, pops);
}

inline QuantumState spin_state(const SpinDipoleModel& m, Vec2 q, std::array<double, 2> pops,
                               std::array<double, 2> phases = {0.0, 0.0}) {
  return berrydyn::detail::initial_spin_state(m, q, pops, phases);
}

// Circular-orbit hybrid initial state at (r0, 0) with the ccw balance rate.
inline HybridState orbit_state(const SpinDipoleModel& m, double r0, std::array<double, 2> pops) {
  const auto acts = actions_of(m, pops);
  const double w = orbit_rate(m, r0, acts);
  const Vec2 q0{r0, 0.0};
  const Vec2 v0{0.0, w * r0};
  return HybridState{spin_state(m, q0, pops), q0, m.mass() * v0, 0.0};
}

}  // namespace testutil

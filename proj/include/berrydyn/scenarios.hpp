#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "berrydyn/config.hpp"
#include "berrydyn/csv.hpp"
#include "berrydyn/effective.hpp"
#include "berrydyn/errors.hpp"
#include "berrydyn/fulldyn.hpp"
#include "berrydyn/geometry.hpp"
#include "berrydyn/model.hpp"
#include "berrydyn/quantum.hpp"
#include "berrydyn/scaling.hpp"
#include "berrydyn/version.hpp"

namespace berrydyn {

// Paper's quoted estimates for the reproduce checks.
inline constexpr double kPaperBz = 3.2e-4;          // T
inline constexpr double kPaperCurvature = 1.20e-22;  // kg/s
inline constexpr double kPaperDeltaNu = 0.7e-8;      // Hz

// Full-dynamics runs above this step budget are refused; they indicate raw SI
// parameters whose timescale ratio is far beyond what stepping can cover.
inline constexpr double kMaxFullDynSteps = 1e9;

struct CheckResult {
  std::string name;
  std::string status;  // "pass" | "fail" | "error" | "no_orbit"
  double measured = std::numeric_limits<double>::quiet_NaN();
  double expected = std::numeric_limits<double>::quiet_NaN();
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct RunManifest {
  ScenarioConfig config;
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;
  double wall_clock_seconds = 0.0;

  bool all_passed() const {
    for (const auto& c : checks)
      if (c.status != "pass") return false;
    return !checks.empty();
  }
};

inline json manifest_to_json(const RunManifest& m) {
  json j;
  j["schema_version"] = 1;
  j["code_version"] = kVersion;
  j["scenario"] = scenario_to_string(m.config.scenario);
  j["config"] = config_to_json(m.config);
  j["checks"] = json::array();
  for (const auto& c : m.checks) {
    json e;
    e["name"] = c.name;
    e["status"] = c.status;
    if (std::isfinite(c.measured)) e["measured"] = c.measured;
    if (std::isfinite(c.expected)) e["expected"] = c.expected;
    if (std::isfinite(c.tolerance)) e["tolerance"] = c.tolerance;
    if (!c.detail.empty()) e["detail"] = c.detail;
    j["checks"].push_back(e);
  }
  j["artifacts"] = m.artifacts;
  j["all_passed"] = m.all_passed();
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  return j;
}

namespace detail {

// Fail-soft check recording: a failing or throwing check never suppresses
// the rest of the suite.
class ScenarioContext {
 public:
  ScenarioContext(const ScenarioConfig& cfg, std::filesystem::path out_dir)
      : cfg_(cfg), out_dir_(std::move(out_dir)) {
    std::filesystem::create_directories(out_dir_);
  }

  const ScenarioConfig& cfg() const { return cfg_; }
  std::vector<CheckResult>& checks() { return checks_; }
  const std::vector<std::string>& artifacts() const { return artifacts_; }

  void write_artifact(const std::string& name, const std::string& content) {
    atomic_write_file(out_dir_ / name, content);
    artifacts_.push_back(name);
  }

  void check_rel(const std::string& name, double measured, double expected, double rel_tol,
                 const std::string& detail = "") {
    CheckResult c{name, "", measured, expected, rel_tol, detail};
    c.status = std::abs(measured - expected) <= rel_tol * std::abs(expected) ? "pass" : "fail";
    checks_.push_back(std::move(c));
  }

  void check_abs(const std::string& name, double measured, double expected, double abs_tol,
                 const std::string& detail = "") {
    CheckResult c{name, "", measured, expected, abs_tol, detail};
    c.status = std::abs(measured - expected) <= abs_tol ? "pass" : "fail";
    checks_.push_back(std::move(c));
  }

  void check_le(const std::string& name, double measured, double bound,
                const std::string& detail = "") {
    CheckResult c{name, "", measured, bound, bound, detail};
    c.status = measured <= bound ? "pass" : "fail";
    checks_.push_back(std::move(c));
  }

  void check_true(const std::string& name, bool ok, const std::string& detail = "") {
    CheckResult c{name, ok ? "pass" : "fail"};
    c.detail = detail;
    checks_.push_back(std::move(c));
  }

  template <class F>
  void guarded(const std::string& name, F&& f) {
    try {
      f();
    } catch (const NoOrbitError& e) {
      checks_.push_back(CheckResult{name, "no_orbit", {}, {}, {}, e.what()});
    } catch (const SimError& e) {
      checks_.push_back(CheckResult{name, "error", {}, {}, {}, e.what()});
    } catch (const std::exception& e) {
      checks_.push_back(CheckResult{name, "error", {}, {}, {}, e.what()});
    }
  }

 private:
  const ScenarioConfig& cfg_;
  std::filesystem::path out_dir_;
  std::vector<CheckResult> checks_;
  std::vector<std::string> artifacts_;
};

// Physical [P+, P-] populations reordered into ascending-frame actions.
inline std::vector<double> frame_actions(const SpinDipoleModel& m, std::array<double, 2> pops) {
  const int a = m.aligned_band();
  std::vector<double> actions(2, 0.0);
  actions[static_cast<std::size_t>(a)] = m.hbar() * pops[0];
  actions[static_cast<std::size_t>(1 - a)] = m.hbar() * pops[1];
  return actions;
}

inline std::vector<double> frame_angles(const SpinDipoleModel& m, std::array<double, 2> phases) {
  const int a = m.aligned_band();
  std::vector<double> angles(2, 0.0);
  angles[static_cast<std::size_t>(a)] = phases[0];
  angles[static_cast<std::size_t>(1 - a)] = phases[1];
  return angles;
}

inline QuantumState initial_spin_state(const SpinDipoleModel& m, Vec2 q0,
                                       std::array<double, 2> pops, std::array<double, 2> phases) {
  const EigenFrame frame = m.eigenframe(q0);
  ActionAngleState aa{frame_actions(m, pops), frame_angles(m, phases)};
  return from_action_angle(aa, frame, m.hbar());
}

// Internal-unit dynamics setup. timescale_ratio = 0 keeps the real (scaled)
// mass; the step budget then decides whether the run is feasible.
struct DynamicsSetup {
  SpinDipoleModel model;
  double omega_ref;  // slow calibration rate at r_ref (internal units)
  double r_ref;
};

inline DynamicsSetup make_dynamics_setup(const ScenarioConfig& cfg, double ratio) {
  double r_ref = cfg.initial.position_d.norm();
  if (r_ref < 0.1) r_ref = 1.0;
  double imbalance = std::abs(cfg.initial.populations[0] - cfg.initial.populations[1]);
  if (imbalance == 0.0) imbalance = 1.0;

  ModelParams ip = ratio > 0.0 ? params_for_timescale_ratio(cfg.model, ratio, r_ref, imbalance)
                               : internal_params(cfg.model);
  SpinDipoleModel model(ip, cfg.trap);
  const double coef = std::abs(model.gradient_coefficient(r_ref, imbalance));
  const double omega_ref = std::sqrt(coef / model.mass());
  return DynamicsSetup{std::move(model), omega_ref, r_ref};
}

inline void check_step_budget(double duration, double dt) {
  const double steps = duration / dt;
  if (steps > kMaxFullDynSteps) {
    throw ValidationError(
        "full dynamics would need about " + std::to_string(steps) +
        " steps (budget 1e9): the fast/slow ratio of these parameters is not steppable; "
        "set numerics.timescale_ratio > 0 to run in scaled units");
  }
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (n - 1);
  }
  v.back() = b;
  return v;
}

// Signed circular-orbit rate from the radial force balance; ccw root if
// ccw = true, cw root otherwise.
inline double orbit_omega(const SpinDipoleModel& m, double r0, std::span<const double> actions,
                          bool ccw) {
  const double dmp = detail::pop_diff_minus_plus(m, actions);
  const double coef = m.gradient_coefficient(r0, dmp);
  const double curv = m.curvature_closed_form(r0, -dmp);
  if (coef > 0.0) throw NoOrbitError("radial force is repulsive at the requested radius");
  const double disc = std::sqrt(curv * curv - 4.0 * m.mass() * coef);
  return ccw ? (-curv + disc) / (2.0 * m.mass()) : (-curv - disc) / (2.0 * m.mass());
}

struct FullRun {
  HybridTrajectory traj;
  double duration;
};

inline FullRun run_full(const SpinDipoleModel& model, Vec2 q0, Vec2 v0,
                        std::array<double, 2> pops, std::array<double, 2> phases, double duration,
                        int samples, int steps_per_fast_period) {
  const QuantumState psi0 = initial_spin_state(model, q0, pops, phases);
  const HybridState s0{psi0, q0, model.mass() * v0, 0.0};
  StepControl ctrl;
  ctrl.steps_per_fast_period = steps_per_fast_period;
  check_step_budget(duration, default_timestep(model, q0, steps_per_fast_period));
  const std::vector<double> times = linspace(0.0, duration, samples);
  return FullRun{integrate(model, s0, duration, times, ctrl), duration};
}

inline EffectiveTrajectory run_effective(const SpinDipoleModel& model, Vec2 q0, Vec2 v0,
                                         std::array<double, 2> pops, double duration, int samples,
                                         double dt) {
  const EffectiveState s0{q0, v0, frame_actions(model, pops), 0.0};
  EffectiveStepControl ctrl;
  ctrl.dt = dt;
  const std::vector<double> times = linspace(0.0, duration, samples);
  return integrate_effective(model, s0, duration, times, ctrl);
}

// Mean signed circulation rate measured from an integrated effective orbit.
inline double measured_orbit_frequency(const SpinDipoleModel& m, double r0,
                                       std::span<const double> actions, double omega,
                                       int n_periods = 4, int steps_per_period = 16384) {
  const double period = 2.0 * std::numbers::pi / std::abs(omega);
  const double duration = n_periods * period;
  EffectiveState s0{Vec2{r0, 0.0}, Vec2{0.0, omega * r0},
                    std::vector<double>(actions.begin(), actions.end()), 0.0};
  EffectiveStepControl ctrl;
  ctrl.dt = period / steps_per_period;
  const int samples = n_periods * 64 + 1;
  const auto traj = integrate_effective(m, s0, duration, linspace(0.0, duration, samples), ctrl);

  double unwrapped = 0.0;
  double prev = std::atan2(traj.samples.front().q2.y, traj.samples.front().q2.x);
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double a = std::atan2(traj.samples[k].q2.y, traj.samples[k].q2.x);
    unwrapped += std::remainder(a - prev, 2.0 * std::numbers::pi);
    prev = a;
  }
  return unwrapped / duration;
}

// The cone angle of the field direction around a centered circle, measured
// from -z: tan(theta) = 3 r d / (2 d^2 - r^2).
inline double loop_cone_angle(double r, double d) {
  return std::atan2(3.0 * r * d, 2.0 * d * d - r * r);
}

inline void scenario_reproduce_paper(ScenarioContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg();
  const SpinDipoleModel model(cfg.model);
  const double r = cfg.numerics.probe_radius;
  const auto actions = frame_actions(model, cfg.initial.populations);
  const double pop_pm = cfg.initial.populations[0] - cfg.initial.populations[1];

  json summary;

  ctx.guarded("bz_magnitude", [&] {
    const double bz = std::abs(model.field(Vec2{r, 0.0}).bz);
    summary["bz_tesla"] = bz;
    ctx.check_rel("bz_magnitude", bz, kPaperBz, 0.02, "|Bz| at probe radius vs paper estimate");
  });

  double closed = 0.0;
  ctx.guarded("curvature_closed_form", [&] {
    closed = model.curvature_closed_form(r, pop_pm);
    summary["curvature_closed_kg_per_s"] = closed;
    ctx.check_rel("curvature_closed_form", std::abs(closed), kPaperCurvature, 0.02,
                  "|curvature| closed form vs paper estimate");
  });

  ctx.guarded("curvature_plaquette", [&] {
    const double numeric =
        curvature_richardson(model, Vec2{r, 0.0}, actions, 1e-4 * cfg.model.d);
    summary["curvature_plaquette_kg_per_s"] = numeric;
    ctx.check_rel("curvature_plaquette", std::abs(numeric), kPaperCurvature, 0.02,
                  "|curvature| gauge-invariant plaquette vs paper estimate");
    ctx.check_rel("curvature_cross_agreement", numeric, closed, 1e-6,
                  "plaquette vs closed form after Richardson extrapolation");
  });

  ctx.guarded("frequency_split", [&] {
    const auto rep = frequency_split(model, r, actions);
    summary["delta_nu_hz"] = rep.delta_nu;
    ctx.check_rel("frequency_split", std::abs(rep.delta_nu), kPaperDeltaNu, 0.10,
                  "|delta nu| vs paper estimate (paper value is rounded)");
  });

  ctx.guarded("geometric_invariance", [&] {
    ModelParams scaled = cfg.model;
    scaled.mu *= 10.0;
    scaled.mu0_mF *= 10.0;
    const SpinDipoleModel model10(scaled);
    const double base = curvature_numeric(model, Vec2{r, 0.0}, actions, 1e-4 * cfg.model.d);
    const double ten = curvature_numeric(model10, Vec2{r, 0.0}, actions, 1e-4 * cfg.model.d);
    ctx.check_rel("geometric_invariance", ten, base, 1e-12,
                  "curvature under 10x scaling of mu and mu0_mF");
  });

  ctx.write_artifact("reproduce_summary.json", summary.dump(2) + "\n");
}

inline void scenario_symmetry_break(ScenarioContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg();
  const DynamicsSetup setup = make_dynamics_setup(cfg, cfg.numerics.timescale_ratio);
  const SpinDipoleModel& model = setup.model;

  const Vec2 q0 = cfg.initial.position_d;
  Vec2 v0 = setup.omega_ref * cfg.initial.velocity;
  if (v0.x == 0.0 && v0.y == 0.0) v0 = Vec2{0.6 * setup.omega_ref, 0.0};
  const double duration = cfg.numerics.duration_slow_periods * 2.0 * std::numbers::pi / setup.omega_ref;
  const int samples = cfg.numerics.output_samples;

  const auto pops = cfg.initial.populations;
  const std::array<double, 2> swapped{pops[1], pops[0]};
  const std::array<double, 2> equal{0.5, 0.5};

  auto quarter_y = [&](const HybridTrajectory& t) {
    return t.samples[t.samples.size() / 4].q2.y;
  };
  auto x_excursion = [&](const HybridTrajectory& t) {
    double m = 0.0;
    for (const auto& s : t.samples) m = std::max(m, std::abs(s.q2.x));
    return m;
  };

  std::optional<double> y_primary, y_swapped;

  ctx.guarded("deflection_primary", [&] {
    const FullRun run = run_full(model, q0, v0, pops, cfg.initial.phases, duration, samples,
                                 cfg.numerics.steps_per_fast_period);
    ctx.write_artifact("full_primary.csv", hybrid_trajectory_csv(run.traj, model.dim()));
    y_primary = quarter_y(run.traj);
    ctx.check_true("deflection_nonzero", std::abs(*y_primary) > 1e-6,
                   "|y(T/4)| = " + fmt17(std::abs(*y_primary)) + " (units of d)");
  });

  ctx.guarded("deflection_swapped", [&] {
    const FullRun run = run_full(model, q0, v0, swapped, cfg.initial.phases, duration, samples,
                                 cfg.numerics.steps_per_fast_period);
    ctx.write_artifact("full_swapped.csv", hybrid_trajectory_csv(run.traj, model.dim()));
    y_swapped = quarter_y(run.traj);
    if (y_primary) {
      ctx.check_true("deflection_sign_flip", (*y_primary) * (*y_swapped) < 0.0,
                     "y(T/4) primary = " + fmt17(*y_primary) + ", swapped = " + fmt17(*y_swapped));
    }
  });

  ctx.guarded("equal_population_run", [&] {
    const FullRun run = run_full(model, q0, v0, equal, cfg.initial.phases, duration, samples,
                                 cfg.numerics.steps_per_fast_period);
    ctx.write_artifact("full_equal.csv", hybrid_trajectory_csv(run.traj, model.dim()));
    double mean_y = 0.0;
    for (const auto& s : run.traj.samples) mean_y += s.q2.y;
    mean_y /= static_cast<double>(run.traj.samples.size());
    const double exc = x_excursion(run.traj);
    ctx.check_le("equal_population_avg_y", std::abs(mean_y), 1e-3 * exc,
                 "time-averaged |y| against 1e-3 of the x excursion " + fmt17(exc));
  });

  ctx.guarded("effective_sign_agreement", [&] {
    const auto traj = run_effective(model, q0, v0, pops, duration, samples,
                                    duration / (4096.0 * cfg.numerics.duration_slow_periods));
    ctx.write_artifact("effective_primary.csv", effective_trajectory_csv(traj, model.mass()));
    const double y_eff = traj.samples[traj.samples.size() / 4].q2.y;
    if (y_primary) {
      ctx.check_true("effective_sign_agreement", (*y_primary) * y_eff > 0.0,
                     "y(T/4) full = " + fmt17(*y_primary) + ", effective = " + fmt17(y_eff));
    }
  });
}

inline void scenario_frequency_split(ScenarioContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg();
  const SpinDipoleModel model(cfg.model);
  const auto actions = frame_actions(model, cfg.initial.populations);
  const double r = cfg.numerics.probe_radius;

  std::optional<FrequencySplitReport> rep;
  ctx.guarded("frequency_split_report", [&] {
    rep = frequency_split(model, r, actions);
    json j;
    j["radius"] = rep->radius;
    j["nu_cw"] = rep->nu_cw;
    j["nu_ccw"] = rep->nu_ccw;
    j["delta_nu"] = rep->delta_nu;
    j["curvature_at_r"] = rep->curvature_at_r;
    ctx.write_artifact("frequency_split.json", j.dump(2) + "\n");
    ctx.check_rel("delta_nu_identity", rep->delta_nu,
                  rep->curvature_at_r / (2.0 * std::numbers::pi * model.mass()), 1e-12,
                  "delta_nu against curvature/(2 pi M)");
  });

  ctx.guarded("simulated_split", [&] {
    if (!rep) throw NoOrbitError("no analytic report to compare against");
    // bead-on-circle measurement in internal units with the real scaled mass
    const SpinDipoleModel im(internal_params(cfg.model), cfg.trap);
    const Scales sc = make_scales(cfg.model);
    const double r_int = r / sc.length;
    const auto actions_int = frame_actions(im, cfg.initial.populations);
    const double w_ccw = orbit_omega(im, r_int, actions_int, true);
    const double w_cw = orbit_omega(im, r_int, actions_int, false);
    const double m_ccw = measured_orbit_frequency(im, r_int, actions_int, w_ccw);
    const double m_cw = measured_orbit_frequency(im, r_int, actions_int, w_cw);
    const double delta_nu_sim =
        (std::abs(m_cw) - std::abs(m_ccw)) / (2.0 * std::numbers::pi) * sc.frequency;
    ctx.check_rel("simulated_split", delta_nu_sim, rep->delta_nu, 1e-3,
                  "integrated cw/ccw orbits vs the closed-form split");
  });
}

inline void scenario_full_vs_effective(ScenarioContext& ctx, bool sweep_invariants) {
  const ScenarioConfig& cfg = ctx.cfg();
  const std::vector<double>& ratios = cfg.numerics.sweep_ratios;

  std::vector<double> discrepancies;
  std::vector<double> drifts;
  std::string csv = sweep_invariants ? "ratio,i_drift_over_hbar,discrepancy\n" : "ratio,discrepancy\n";

  for (double ratio : ratios) {
    ctx.guarded("run_ratio_" + std::to_string(static_cast<long long>(ratio)), [&] {
      const DynamicsSetup setup = make_dynamics_setup(cfg, ratio);
      const SpinDipoleModel& model = setup.model;
      const Vec2 q0 = cfg.initial.position_d;
      const double r0 = q0.norm();
      if (!(r0 > 0.0)) throw ValidationError("initial.position must be off the origin for orbits");

      const auto actions = frame_actions(model, cfg.initial.populations);
      Vec2 v0;
      double omega_nominal;
      if (cfg.initial.circular_orbit ||
          (cfg.initial.velocity.x == 0.0 && cfg.initial.velocity.y == 0.0)) {
        const double w = orbit_omega(model, r0, actions, true);
        v0 = w * Vec2{-q0.y, q0.x};
        omega_nominal = std::abs(w);
      } else {
        v0 = setup.omega_ref * cfg.initial.velocity;
        omega_nominal = setup.omega_ref;
      }
      const double duration =
          cfg.numerics.duration_slow_periods * 2.0 * std::numbers::pi / omega_nominal;
      const int samples = cfg.numerics.output_samples;

      const FullRun full = run_full(model, q0, v0, cfg.initial.populations, cfg.initial.phases,
                                    duration, samples, cfg.numerics.steps_per_fast_period);
      const auto eff = run_effective(model, q0, v0, cfg.initial.populations, duration, samples,
                                     duration / (4096.0 * cfg.numerics.duration_slow_periods));

      const std::string tag = std::to_string(static_cast<long long>(ratio));
      ctx.write_artifact("full_ratio_" + tag + ".csv", hybrid_trajectory_csv(full.traj, model.dim()));
      ctx.write_artifact("effective_ratio_" + tag + ".csv",
                         effective_trajectory_csv(eff, model.mass()));

      const Vec2 qf = full.traj.samples.back().q2;
      const Vec2 qe = eff.samples.back().q2;
      const double disc = (qf - qe).norm() / r0;
      discrepancies.push_back(disc);

      if (sweep_invariants) {
        double drift = 0.0;
        const auto& i0 = full.traj.diagnostics.front().actions;
        for (const auto& d : full.traj.diagnostics) {
          for (std::size_t b = 0; b < d.actions.size(); ++b) {
            drift = std::max(drift, std::abs(d.actions[b] - i0[b]));
          }
        }
        drift /= model.hbar();
        drifts.push_back(drift);
        csv += fmt17(ratio) + ',' + fmt17(drift) + ',' + fmt17(disc) + '\n';
        if (ratio >= 1e3) {
          ctx.check_le("adiabatic_invariant_ratio_" + tag, drift, 1e-3,
                       "max |I_n(t) - I_n(0)| / hbar over one slow period");
        }
      } else {
        csv += fmt17(ratio) + ',' + fmt17(disc) + '\n';
      }
    });
  }

  ctx.write_artifact(sweep_invariants ? "adiabatic_sweep.csv" : "full_vs_effective.csv", csv);

  if (discrepancies.size() == ratios.size() && discrepancies.size() >= 2) {
    bool monotone = true;
    for (std::size_t i = 1; i < discrepancies.size(); ++i) {
      if (discrepancies[i] >= discrepancies[i - 1]) monotone = false;
    }
    std::string detail = "discrepancies:";
    for (double d : discrepancies) detail += ' ' + fmt17(d);
    ctx.check_true("discrepancy_monotone_decreasing", monotone, detail);
    ctx.check_le("discrepancy_final", discrepancies.back(), 0.01,
                 "relative position discrepancy after one slow period at the largest ratio");
  } else if (!discrepancies.empty()) {
    ctx.check_le("discrepancy_final", discrepancies.back(), 0.01,
                 "relative position discrepancy after one slow period");
  }
}

inline void scenario_berry_loop(ScenarioContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg();
  const SpinDipoleModel model(cfg.model);
  const double d = cfg.model.d;
  const double r = cfg.numerics.loop_radius_d * d;

  json report = json::array();
  const double theta = loop_cone_angle(r, d);
  const double omega = 2.0 * std::numbers::pi * (1.0 - std::cos(theta));

  const int plus_band = model.aligned_band();
  for (int which = 0; which < 2; ++which) {
    const bool is_plus = which == 0;
    const std::size_t band = static_cast<std::size_t>(is_plus ? plus_band : 1 - plus_band);
    const double prediction = is_plus ? -0.5 * omega : 0.5 * omega;
    const std::string label = is_plus ? "plus" : "minus";

    ctx.guarded("berry_loop_" + label, [&] {
      const LoopPhase lp = berry_phase_circle(model, Vec2{0.0, 0.0}, r, band);
      json e;
      e["loop_radius"] = r;
      e["band"] = label;
      e["phase"] = lp.phase;
      e["solid_angle_prediction"] = prediction;
      e["difference"] = lp.phase - prediction;
      report.push_back(e);
      ctx.check_abs("berry_loop_phase_" + label, lp.phase, prediction, 1e-4,
                    "loop phase vs the solid-angle prediction (rad)");

      // reversal of orientation must negate the phase exactly
      LoopPath path = make_circle_loop(Vec2{0.0, 0.0}, r, lp.n_points, band);
      std::reverse(path.points.begin(), path.points.end());
      const LoopPhase rev = berry_phase_loop(model, path);
      const LoopPhase fwd = berry_phase_loop(model, make_circle_loop(Vec2{0.0, 0.0}, r,
                                                                     lp.n_points, band));
      ctx.check_true("berry_loop_reversal_" + label, rev.phase == -fwd.phase,
                     "reversed-orientation phase negates exactly");
    });
  }
  ctx.write_artifact("loop_phase.json", report.dump(2) + "\n");
}

inline void scenario_curvature_map(ScenarioContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg();
  const SpinDipoleModel model(cfg.model);
  const double d = cfg.model.d;
  const double extent = cfg.numerics.grid_extent_d * d;
  const int n = cfg.numerics.grid_n;
  const auto actions = frame_actions(model, cfg.initial.populations);
  const double pop_pm = cfg.initial.populations[0] - cfg.initial.populations[1];

  std::vector<CurvatureGridPoint> grid;
  grid.reserve(static_cast<std::size_t>(n) * n);
  double max_abs_closed = 0.0;
  double max_dev = 0.0;

  ctx.guarded("curvature_map", [&] {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const double x = -extent + 2.0 * extent * ix / (n - 1);
        const double y = -extent + 2.0 * extent * iy / (n - 1);
        const double value = curvature_richardson(model, Vec2{x, y}, actions, 1e-4 * d);
        const double closed = model.curvature_closed_form(std::hypot(x, y), pop_pm);
        max_abs_closed = std::max(max_abs_closed, std::abs(closed));
        max_dev = std::max(max_dev, std::abs(value - closed));
        grid.push_back(CurvatureGridPoint{x, y, value});
      }
    }
    ctx.write_artifact("curvature_map.csv", curvature_grid_csv(grid));
    ctx.check_le("curvature_map_max_deviation", max_dev / max_abs_closed, 1e-6,
                 "max |plaquette - closed| over the grid, relative to the field peak");
  });
}

inline void run_checks(ScenarioContext& ctx) {
  switch (ctx.cfg().scenario) {
    case Scenario::reproduce_paper: scenario_reproduce_paper(ctx); break;
    case Scenario::symmetry_break: scenario_symmetry_break(ctx); break;
    case Scenario::frequency_split: scenario_frequency_split(ctx); break;
    case Scenario::full_vs_effective: scenario_full_vs_effective(ctx, false); break;
    case Scenario::adiabatic_sweep: scenario_full_vs_effective(ctx, true); break;
    case Scenario::berry_loop: scenario_berry_loop(ctx); break;
    case Scenario::curvature_map: scenario_curvature_map(ctx); break;
  }
}

}  // namespace detail

// Executes the configured scenario in out_dir. Artifacts are written as they
// are produced (single writer, atomic rename); the manifest is written last.
inline RunManifest run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::ScenarioContext ctx(cfg, out_dir);
  detail::run_checks(ctx);

  RunManifest manifest;
  manifest.config = cfg;
  manifest.checks = std::move(ctx.checks());
  manifest.artifacts = ctx.artifacts();
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  atomic_write_file(out_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
  return manifest;
}

}  // namespace berrydyn

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "helpers.hpp"

using namespace berrydyn;
using Catch::Approx;
using testutil::actions_of;
using testutil::orbit_rate;
using testutil::ratio_model;

namespace {

const ModelParams kInternal = internal_params(ModelParams{});

}  // namespace

TEST_CASE("effective force vanishes for equal populations at rest") {
  const SpinDipoleModel model(kInternal);
  const EffectiveState s{Vec2{0.7, -0.4}, Vec2{0.0, 0.0}, {0.5, 0.5}, 0.0};
  const Vec2 f = effective_force(s, model);
  CHECK(f.x == 0.0);
  CHECK(f.y == 0.0);
}

TEST_CASE("effective force at rest on a pure band is radial") {
  const SpinDipoleModel model(kInternal);
  const Vec2 q{0.8, 0.6};
  const EffectiveState s{q, Vec2{0.0, 0.0}, actions_of(model, {0.0, 1.0}), 0.0};
  const Vec2 f = effective_force(s, model);
  CHECK(f.x * q.y - f.y * q.x == 0.0);   // no tangential component
  CHECK(dot(f, q) < 0.0);                // attractive for mu < 0, population on the anti band
}

TEST_CASE("gradient term equals a finite difference of the level energy") {
  const SpinDipoleModel model(kInternal);
  const auto actions = actions_of(model, {0.0, 1.0});
  const double pop_diff_mp = 1.0;  // |a_-|^2 - |a_+|^2
  const double h = 1e-6;
  for (const Vec2 q : {Vec2{0.5, 0.2}, Vec2{-0.9, 0.7}, Vec2{0.05, -0.03}}) {
    const EffectiveState s{q, Vec2{0.0, 0.0}, actions, 0.0};
    const Vec2 f = effective_force(s, model);
    auto level = [&](Vec2 qq) {
      return pop_diff_mp * model.params().mu * model.field_magnitude(qq.norm());
    };
    const double fx = -(level(q + Vec2{h, 0.0}) - level(q - Vec2{h, 0.0})) / (2.0 * h);
    const double fy = -(level(q + Vec2{0.0, h}) - level(q - Vec2{0.0, h})) / (2.0 * h);
    const double scale = std::hypot(fx, fy);
    CHECK(f.x == Approx(fx).margin(1e-8 * scale));
    CHECK(f.y == Approx(fy).margin(1e-8 * scale));
  }
}

TEST_CASE("generic finite-difference path agrees with the closed forms") {
  // wrap the spin model so the closed-form members are invisible
  struct GenericView {
    SpinDipoleModel base;
    std::size_t dim() const { return base.dim(); }
    double hbar() const { return base.hbar(); }
    double mass() const { return base.mass(); }
    double length_scale() const { return base.length_scale(); }
    HermitianOperator hamiltonian(Vec2 q) const { return base.hamiltonian(q); }
    EigenFrame eigenframe(Vec2 q) const { return base.eigenframe(q); }
    double potential(Vec2 q) const { return base.potential(q); }
    Vec2 potential_gradient(Vec2 q) const { return base.potential_gradient(q); }
  };
  const SpinDipoleModel model(kInternal);
  const GenericView generic{SpinDipoleModel(kInternal)};
  const EffectiveState s{Vec2{0.6, -0.3}, Vec2{1e-3, 2e-3}, actions_of(model, {0.0, 1.0}), 0.0};
  const Vec2 closed = effective_force(s, model);
  const Vec2 fd = effective_force(s, generic);
  const double scale = closed.norm();
  CHECK(fd.x == Approx(closed.x).margin(1e-6 * scale));
  CHECK(fd.y == Approx(closed.y).margin(1e-6 * scale));
}

TEST_CASE("central-force motion stays on the initial ray when curvature is off") {
  const SpinDipoleModel model = ratio_model(200.0, 0.5);
  // equal populations: no gradient force and no curvature force; add a trap so
  // something pulls the particle back along the ray
  ModelParams p = model.params();
  TrapParams trap{true, 1e-3};
  const SpinDipoleModel trapped(p, trap);
  const EffectiveState s0{Vec2{0.5, 0.0}, Vec2{1e-4, 0.0}, actions_of(trapped, {0.5, 0.5}), 0.0};
  EffectiveStepControl ctrl;
  ctrl.dt = 1.0;
  const auto traj = integrate_effective(trapped, s0, 4000.0, detail::linspace(0.0, 4000.0, 33), ctrl);
  for (const auto& s : traj.samples) CHECK(s.q2.y == 0.0);
}

TEST_CASE("population swap with mu flipped mirrors the trajectory exactly") {
  // swapping the band populations flips the curvature sign; flipping mu as
  // well keeps the gradient force identical, so y(t) -> -y(t) bitwise
  ModelParams p_minus = params_for_timescale_ratio(ModelParams{}, 300.0, 0.5, 1.0);
  ModelParams p_plus = p_minus;
  p_plus.mu = -p_minus.mu;
  const SpinDipoleModel m_minus(p_minus);
  const SpinDipoleModel m_plus(p_plus);

  const auto a_minus = actions_of(m_minus, {0.0, 1.0});
  const auto a_plus = actions_of(m_plus, {1.0, 0.0});

  const double w = orbit_rate(m_minus, 0.5, a_minus);
  const Vec2 q0{0.5, 0.0};
  const Vec2 v0{0.0, w * 0.5};
  const double T = 2.0 * std::numbers::pi / std::abs(w);
  EffectiveStepControl ctrl;
  ctrl.dt = T / 4096.0;
  const auto times = detail::linspace(0.0, T, 65);

  const auto ta = integrate_effective(m_minus, EffectiveState{q0, v0, a_minus, 0.0}, T, times, ctrl);
  const auto tb = integrate_effective(m_plus, EffectiveState{q0, Vec2{0.0, -v0.y}, a_plus, 0.0}, T,
                                      times, ctrl);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(tb.samples[k].q2.x == ta.samples[k].q2.x);
    CHECK(tb.samples[k].q2.y == -ta.samples[k].q2.y);
  }
}

TEST_CASE("the curvature force does no work") {
  const SpinDipoleModel model = ratio_model(300.0, 0.5);
  const auto actions = actions_of(model, {0.0, 1.0});
  const double w = orbit_rate(model, 0.5, actions);
  // launch off-circle so the orbit is genuinely two-dimensional
  const EffectiveState s0{Vec2{0.5, 0.0}, Vec2{0.3 * w * 0.5, 1.2 * w * 0.5}, actions, 0.0};
  const double T = 2.0 * std::numbers::pi / std::abs(w);
  EffectiveStepControl ctrl;
  ctrl.dt = T / 8192.0;
  const auto traj = integrate_effective(model, s0, 2.0 * T, detail::linspace(0.0, 2.0 * T, 65), ctrl);
  const double e0 = traj.energies.front();
  for (const double e : traj.energies) CHECK(std::abs(e - e0) < 1e-10 * std::abs(e0));
}

TEST_CASE("full dynamics converges to the effective dynamics in the ratio") {
  const std::array<double, 2> pops{0.0, 1.0};
  std::vector<double> disc;
  for (const double eta : {100.0, 1000.0}) {
    const SpinDipoleModel model = ratio_model(eta, 0.5);
    const auto actions = actions_of(model, pops);
    const double w = orbit_rate(model, 0.5, actions);
    const Vec2 q0{0.5, 0.0};
    const Vec2 v0{0.0, w * 0.5};
    const double T = 2.0 * std::numbers::pi / std::abs(w);

    StepControl fctrl;
    fctrl.estimate_local_error = false;
    const HybridState h0{testutil::spin_state(model, q0, pops), q0, model.mass() * v0, 0.0};
    const auto full = integrate(model, h0, T, std::vector<double>{T}, fctrl);

    EffectiveStepControl ectrl;
    ectrl.dt = T / 8192.0;
    const auto eff = integrate_effective(model, EffectiveState{q0, v0, actions, 0.0}, T,
                                         std::vector<double>{T}, ectrl);
    disc.push_back((full.samples.back().q2 - eff.samples.back().q2).norm() / 0.5);
  }
  CHECK(disc[1] < disc[0]);
  CHECK(disc[1] < 0.01);
}

TEST_CASE("frequency split matches the paper estimate at the paper parameters") {
  const SpinDipoleModel model{ModelParams{}};
  const auto actions = actions_of(model, {0.0, 1.0});
  const FrequencySplitReport rep = frequency_split(model, 1e-9, actions);
  CHECK(std::abs(rep.delta_nu) == Approx(0.7e-8).epsilon(0.10));
  CHECK(rep.delta_nu ==
        Approx(rep.curvature_at_r / (2.0 * std::numbers::pi * model.mass())).epsilon(1e-12));
  CHECK(rep.nu_cw > 0.0);
  CHECK(rep.nu_ccw > 0.0);
  // mu < 0 with population on the anti-aligned band: curvature is negative
  CHECK(rep.curvature_at_r < 0.0);
  CHECK(rep.delta_nu < 0.0);
}

TEST_CASE("equal populations close the frequency split") {
  const SpinDipoleModel model{ModelParams{}};
  const FrequencySplitReport rep = frequency_split(model, 1e-9, actions_of(model, {0.5, 0.5}));
  CHECK(rep.delta_nu == 0.0);
  CHECK(rep.nu_cw == rep.nu_ccw);
}

TEST_CASE("repulsive configurations have no circular orbit") {
  const SpinDipoleModel model{ModelParams{}};  // mu < 0
  CHECK_THROWS_AS(frequency_split(model, 1e-9, actions_of(model, {1.0, 0.0})), NoOrbitError);
}

TEST_CASE("integrated cw and ccw orbits reproduce the analytic split") {
  // bead-on-circle oracle: measure both circulation rates by integration
  const SpinDipoleModel model(kInternal);
  const Scales sc = make_scales(ModelParams{});
  const double r = 1e-9 / sc.length;
  const auto actions = actions_of(model, {0.0, 1.0});
  const FrequencySplitReport analytic = frequency_split(model, r, actions);

  auto measure = [&](bool ccw) {
    const double w = orbit_rate(model, r, actions, ccw);
    const double period = 2.0 * std::numbers::pi / std::abs(w);
    EffectiveStepControl ctrl;
    ctrl.dt = period / 16384.0;
    ctrl.estimate_local_error = false;
    const int n_periods = 4;
    const double T = n_periods * period;
    const auto times = detail::linspace(0.0, T, n_periods * 64 + 1);
    const EffectiveState s0{Vec2{r, 0.0}, Vec2{0.0, w * r}, actions, 0.0};
    const auto traj = integrate_effective(model, s0, T, times, ctrl);
    double unwrapped = 0.0;
    double prev = 0.0;
    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
      const double a = std::atan2(traj.samples[k].q2.y, traj.samples[k].q2.x);
      unwrapped += std::remainder(a - prev, 2.0 * std::numbers::pi);
      prev = a;
    }
    return unwrapped / T;
  };

  const double w_ccw = measure(true);
  const double w_cw = measure(false);
  const double delta_nu_sim = (std::abs(w_cw) - std::abs(w_ccw)) / (2.0 * std::numbers::pi);
  CHECK(delta_nu_sim == Approx(analytic.delta_nu).epsilon(1e-3));
}

TEST_CASE("effective trajectory CSV drops the quantum columns") {
  const SpinDipoleModel model = ratio_model(100.0, 0.5);
  const auto actions = actions_of(model, {0.0, 1.0});
  const EffectiveState s0{Vec2{0.5, 0.0}, Vec2{0.0, 1e-3}, actions, 0.0};
  EffectiveStepControl ctrl;
  ctrl.dt = 1.0;
  const auto traj = integrate_effective(model, s0, 2.0, detail::linspace(0.0, 2.0, 3), ctrl);
  const std::string csv = effective_trajectory_csv(traj, model.mass());
  CHECK(csv.rfind("t,x,y,px,py,energy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

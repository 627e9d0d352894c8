#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "helpers.hpp"

using namespace berrydyn;
using Catch::Approx;
using testutil::actions_of;
using testutil::orbit_rate;
using testutil::orbit_state;
using testutil::ratio_model;
using testutil::spin_state;

TEST_CASE("total energy of the decoupled free particle") {
  ModelParams p = internal_params(ModelParams{});
  p.mu = 0.0;
  const SpinDipoleModel model(p);
  const QuantumState psi(cvec{{1.0, 0.0}, {0.0, 0.0}});
  const HybridState s{psi, Vec2{0.3, -0.2}, Vec2{3.0, 4.0}, 0.0};
  CHECK(total_energy(s, model) == 25.0 / (2.0 * p.mass));
}

TEST_CASE("total energy of an eigenstate at rest is the eigenvalue") {
  const SpinDipoleModel model(SpinDipoleModel(internal_params(ModelParams{})));
  const Vec2 q{0.5, 0.0};
  const EigenFrame f = model.eigenframe(q);
  const HybridState s{QuantumState(f.states[0]), q, Vec2{0.0, 0.0}, 0.0};
  CHECK(total_energy(s, model) == Approx(f.energies[0]).epsilon(1e-13));
}

TEST_CASE("decoupled limit integrates to uniform motion with a frozen state") {
  ModelParams p = internal_params(ModelParams{});
  p.mu = 0.0;
  p.mass = 7.0;
  const SpinDipoleModel model(p);
  const cvec psi0 = {cplx{0.6, 0.0}, cplx{0.0, 0.8}};
  const HybridState s0{QuantumState(psi0), Vec2{0.1, -0.3}, Vec2{2.0, 1.0}, 0.0};

  StepControl ctrl;
  ctrl.dt = 0.25;
  const double t_final = 10.0;
  const std::vector<double> times{2.5, 5.0, 10.0};
  const HybridTrajectory traj = integrate(model, s0, t_final, times, ctrl);

  for (std::size_t k = 0; k < times.size(); ++k) {
    const HybridState& s = traj.samples[k];
    CHECK(s.q2.x == Approx(0.1 + 2.0 * times[k] / 7.0).epsilon(1e-13));
    CHECK(s.q2.y == Approx(-0.3 + 1.0 * times[k] / 7.0).epsilon(1e-13));
    CHECK(s.p2.x == 2.0);
    CHECK(s.p2.y == 1.0);
    CHECK(s.psi.amps() == psi0);  // H = 0: bitwise frozen
  }
  CHECK(traj.stepping.renormalizations == 0);
}

TEST_CASE("energy drift shrinks at fourth order under step halving") {
  const SpinDipoleModel model = ratio_model(50.0, 0.8, 0.5);
  const std::array<double, 2> pops{0.25, 0.75};
  const auto acts = actions_of(model, pops);
  const double w = orbit_rate(model, 0.8, acts);
  const Vec2 q0{0.8, 0.0};
  const HybridState s0{spin_state(model, q0, pops), q0, model.mass() * Vec2{0.0, w * 0.8}, 0.0};
  const double period = 2.0 * std::numbers::pi / std::abs(w);

  auto max_drift = [&](int steps_per_fast_period) {
    StepControl ctrl;
    ctrl.steps_per_fast_period = steps_per_fast_period;
    ctrl.estimate_local_error = false;
    ctrl.renorm_threshold = 1e9;  // measure the raw scheme
    std::vector<double> times(65);
    for (int i = 0; i <= 64; ++i) times[i] = period * i / 64.0;
    const HybridTrajectory traj = integrate(model, s0, period, times, ctrl);
    const double e0 = traj.diagnostics.front().energy;
    double drift = 0.0;
    for (const auto& d : traj.diagnostics) drift = std::max(drift, std::abs(d.energy - e0));
    return drift;
  };

  const double coarse = max_drift(32);
  const double fine = max_drift(64);
  REQUIRE(coarse > 1e-13);  // measurable above roundoff
  const double order = std::log2(coarse / fine);
  CHECK(order > 3.0);
  CHECK(order < 5.0);
}

TEST_CASE("norm stays within 1e-10 at the default step over a long run") {
  const SpinDipoleModel model = ratio_model(1000.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  const double dt = default_timestep(model, s0.q2);
  const double duration = 2e5 * dt;

  StepControl ctrl;
  ctrl.estimate_local_error = false;
  std::vector<double> times(41);
  for (int i = 0; i <= 40; ++i) times[i] = duration * i / 40.0;
  const HybridTrajectory traj = integrate(model, s0, duration, times, ctrl);

  CHECK(traj.stepping.steps >= 200000);
  CHECK(traj.stepping.max_norm_drift < 1e-10);   // per-step drift before renormalization
  CHECK(traj.stepping.renormalizations > 0);     // policy active and recorded
  for (const auto& d : traj.diagnostics) CHECK(std::abs(d.norm - 1.0) < 1e-10);
}

TEST_CASE("adiabatic invariants freeze at timescale ratio 1e3") {
  const SpinDipoleModel model = ratio_model(1000.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  const double w = orbit_rate(model, 0.5, actions_of(model, {0.0, 1.0}));
  const double period = 2.0 * std::numbers::pi / std::abs(w);

  StepControl ctrl;
  ctrl.estimate_local_error = false;
  std::vector<double> times(129);
  for (int i = 0; i <= 128; ++i) times[i] = period * i / 128.0;
  const HybridTrajectory traj = integrate(model, s0, period, times, ctrl);

  const auto& i0 = traj.diagnostics.front().actions;
  double drift = 0.0;
  for (const auto& d : traj.diagnostics) {
    for (std::size_t b = 0; b < d.actions.size(); ++b) {
      drift = std::max(drift, std::abs(d.actions[b] - i0[b]));
    }
  }
  CHECK(drift < 1e-3 * model.hbar());
}

TEST_CASE("step refuses a step far above the stability bound") {
  const SpinDipoleModel model = ratio_model(100.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  const double dt = default_timestep(model, s0.q2);
  CHECK_THROWS_AS(step(s0, 50.0 * dt, model), StepTooLargeError);
}

TEST_CASE("runaway states are reported as nonfinite") {
  const SpinDipoleModel model = ratio_model(100.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  StepControl ctrl;
  ctrl.estimate_local_error = false;
  ctrl.dt = 1e4 * default_timestep(model, s0.q2);
  CHECK_THROWS_AS(integrate(model, s0, 400.0 * ctrl.dt, {}, ctrl), NonFiniteError);
}

TEST_CASE("zero-duration integration returns exactly the initial state") {
  const SpinDipoleModel model = ratio_model(100.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  const HybridTrajectory traj = integrate(model, s0, s0.t, {});
  REQUIRE(traj.samples.size() == 1);
  CHECK(traj.samples[0].t == s0.t);
  CHECK(traj.samples[0].q2.x == s0.q2.x);
  CHECK(traj.samples[0].p2.y == s0.p2.y);
  CHECK(traj.samples[0].psi.amps() == s0.psi.amps());
  CHECK(traj.stepping.steps == 0);
}

TEST_CASE("output times are landed exactly") {
  const SpinDipoleModel model = ratio_model(100.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  const std::vector<double> times{0.0, 0.37, 1.004, 2.5};
  const HybridTrajectory traj = integrate(model, s0, 2.5, times);
  REQUIRE(traj.samples.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(traj.samples[k].t == times[k]);
}

TEST_CASE("integration is reversible to 1e-8") {
  const SpinDipoleModel model = ratio_model(1000.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  StepControl ctrl;
  ctrl.dt = 0.01;
  ctrl.estimate_local_error = false;
  const double T = 10.0;

  const HybridTrajectory fwd = integrate(model, s0, T, {}, ctrl);
  const HybridTrajectory back = integrate(model, fwd.samples.back(), 0.0, {}, ctrl);
  const HybridState& r = back.samples.back();

  const double pscale = s0.p2.norm();
  CHECK((r.q2 - s0.q2).norm() < 1e-8 * s0.q2.norm());
  CHECK((r.p2 - s0.p2).norm() < 1e-8 * pscale);
  double dpsi = 0.0;
  for (std::size_t i = 0; i < 2; ++i) dpsi += std::norm(r.psi.amps()[i] - s0.psi.amps()[i]);
  CHECK(std::sqrt(dpsi) < 1e-8);
}

TEST_CASE("mirror plus time reversal maps trajectories onto trajectories") {
  const SpinDipoleModel model = ratio_model(1000.0, 0.5);
  const Vec2 q0{0.4, 0.2};
  const Vec2 v0{-2e-4, 3e-4};
  const QuantumState psi0 = spin_state(model, q0, {0.3, 0.7}, {0.2, -0.4});
  const HybridState a0{psi0, q0, model.mass() * v0, 0.0};

  StepControl ctrl;
  ctrl.dt = 0.01;
  ctrl.estimate_local_error = false;
  const double T = 10.0;
  const std::vector<double> times{0.0, 0.5 * T, T};
  const HybridTrajectory a = integrate(model, a0, T, times, ctrl);

  auto transform = [&](const HybridState& s, double t) {
    cvec conj_psi(s.psi.amps());
    for (auto& z : conj_psi) z = std::conj(z);
    return HybridState{QuantumState(std::move(conj_psi)), Vec2{s.q2.x, -s.q2.y},
                       Vec2{-s.p2.x, s.p2.y}, t};
  };

  const HybridState b0 = transform(a.samples.back(), 0.0);
  const HybridTrajectory b = integrate(model, b0, T, times, ctrl);

  // b(tau) must equal the transform of a(T - tau)
  for (std::size_t k = 0; k < times.size(); ++k) {
    const HybridState expect = transform(a.samples[times.size() - 1 - k], times[k]);
    const HybridState& got = b.samples[k];
    CHECK((got.q2 - expect.q2).norm() < 1e-8 * (q0.norm() + 1.0));
    CHECK((got.p2 - expect.p2).norm() < 1e-8 * a0.p2.norm());
    double dpsi = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
      dpsi += std::norm(got.psi.amps()[i] - expect.psi.amps()[i]);
    CHECK(std::sqrt(dpsi) < 1e-8);
  }
}

TEST_CASE("CSV schema lists the exact column order") {
  const SpinDipoleModel model = ratio_model(100.0, 0.5);
  const HybridState s0 = orbit_state(model, 0.5, {0.0, 1.0});
  const HybridTrajectory traj = integrate(model, s0, s0.t, {});
  const std::string csv = hybrid_trajectory_csv(traj, 2);
  CHECK(csv.rfind("t,x,y,px,py,re_psi_1,im_psi_1,re_psi_2,im_psi_2,energy,norm,I_1,I_2\n", 0) == 0);
  // one header plus one sample
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

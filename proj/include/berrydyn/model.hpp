#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "berrydyn/errors.hpp"
#include "berrydyn/linalg.hpp"

namespace berrydyn {

// Physical parameters of the magnetic-particle/spin setup. Any self-consistent
// unit system works; SI at the I/O boundary, nondimensional internally.
struct ModelParams {
  double mu0_mF = 2.0e-21;        // dipole strength mu0*m_F  (T*m^3)
  double mu = -9.2847647e-24;     // spin magnetic moment, signed  (J/T)
  double d = 1.0e-6;              // plane-spin distance  (m)
  double mass = 2.5e-15;          // particle mass  (kg)
  double hbar = 1.0545718e-34;    // reduced Planck constant  (J*s)

  std::vector<std::string> validation_errors(const std::string& prefix = "model.") const {
    std::vector<std::string> errs;
    if (!(d > 0.0) || !std::isfinite(d)) errs.push_back(prefix + "d: must be > 0 and finite");
    if (!(mass > 0.0) || !std::isfinite(mass)) errs.push_back(prefix + "mass: must be > 0 and finite");
    if (!(hbar > 0.0) || !std::isfinite(hbar)) errs.push_back(prefix + "hbar: must be > 0 and finite");
    if (mu0_mF == 0.0 || !std::isfinite(mu0_mF)) errs.push_back(prefix + "mu0_mF: must be nonzero and finite");
    if (!std::isfinite(mu)) errs.push_back(prefix + "mu: must be finite");
    return errs;
  }

  void validate() const {
    const auto errs = validation_errors();
    if (!errs.empty()) {
      std::string msg;
      for (const auto& e : errs) {
        if (!msg.empty()) msg += "; ";
        msg += e;
      }
      throw ValidationError(msg);
    }
  }
};

struct FieldVector {
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  double magnitude() const { return std::sqrt(bx * bx + by * by + bz * bz); }
};

// Phase convention attached to an eigenframe. `component[n]` is the index of
// the anchored amplitude of band n, `magnitude[n]` its modulus (the gauge is
// singular where that underflows).
struct GaugeAnchor {
  enum class Kind { largest_component, spherical_field };
  Kind kind = Kind::largest_component;
  std::vector<int> component;
  std::vector<double> magnitude;
};

// Instantaneous eigensystem of H1(q2): energies ascending, orthonormal states
// in a deterministic smooth gauge.
struct EigenFrame {
  std::vector<double> energies;
  std::vector<cvec> states;
  GaugeAnchor gauge_anchor;

  std::size_t dim() const { return energies.size(); }
};

// Field of the dipole m_F (pointing along -z) evaluated in the particle plane.
inline FieldVector dipole_field(double x, double y, const ModelParams& p) {
  const double r2 = x * x + y * y;
  const double s = p.d * p.d + r2;
  const double denom = 4.0 * std::numbers::pi * s * s * std::sqrt(s);
  const double c = -p.mu0_mF / denom;
  return FieldVector{c * 3.0 * x * p.d, c * 3.0 * y * p.d, c * (2.0 * p.d * p.d - r2)};
}

// -mu * B.sigma in matrix form; Hermitian bitwise by construction.
inline HermitianOperator spin_hamiltonian(const FieldVector& b, double mu) {
  HermitianOperator h(2);
  h.set(0, 0, cplx{-mu * b.bz, 0.0});
  h.set(1, 1, cplx{mu * b.bz, 0.0});
  h.set(0, 1, cplx{-mu * b.bx, mu * b.by});  // -mu*(Bx - i*By)
  return h;
}

namespace detail {

// Rephase so the largest-magnitude component is real positive (ties resolved
// toward the lowest index). Deterministic.
inline void apply_largest_component_anchor(cvec& state, int& index, double& mag) {
  std::size_t k = 0;
  double best = std::abs(state[0]);
  for (std::size_t i = 1; i < state.size(); ++i) {
    const double m = std::abs(state[i]);
    if (m > best) {  // strict: ties resolve to the lowest index
      best = m;
      k = i;
    }
  }
  index = static_cast<int>(k);
  mag = best;
  if (best > 0.0) {
    const cplx fix = std::conj(state[k]) / best;
    for (auto& z : state) z *= fix;
    state[k] = cplx{best, 0.0};
  }
}

inline void check_gap_ascending(const std::vector<double>& energies, double scale) {
  if (scale <= 0.0) throw DegenerateError("operator has zero spectral scale; gauge undefined");
  for (std::size_t i = 0; i + 1 < energies.size(); ++i) {
    const double gap = energies[i + 1] - energies[i];
    if (gap <= 1e-12 * scale) {
      throw DegenerateError("eigenvalue gap " + std::to_string(gap) +
                            " below 1e-12 relative to scale " + std::to_string(scale));
    }
  }
}

}  // namespace detail

// Generic eigensolver: closed form for N=2, cyclic Jacobi otherwise, then the
// largest-component anchor gauge. Same input gives bit-identical output.
inline EigenFrame eigensystem(const HermitianOperator& h) {
  const std::size_t n = h.dim();
  EigenFrame frame;
  frame.gauge_anchor.kind = GaugeAnchor::Kind::largest_component;

  if (n == 2) {
    const double c0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double nz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const cplx c = h(1, 0);  // nx + i*ny
    const double nplane = std::abs(c);
    const double nmag = std::hypot(nz, nplane);
    const double scale = std::max(std::abs(c0) + nmag, h.frobenius_norm());
    frame.energies = {c0 - nmag, c0 + nmag};
    detail::check_gap_ascending(frame.energies, scale);

    const double theta = std::atan2(nplane, nz);
    const double phi = std::atan2(c.imag(), c.real());
    const double ch = std::cos(0.5 * theta);
    const double sh = std::sin(0.5 * theta);
    const cplx eip{std::cos(phi), std::sin(phi)};
    // n-aligned state (eigenvalue c0+nmag) and its orthogonal complement
    cvec aligned = {ch * std::conj(eip), cplx{sh, 0.0}};
    cvec anti = {cplx{sh, 0.0}, -ch * eip};
    frame.states = {std::move(anti), std::move(aligned)};
  } else {
    std::vector<double> evals;
    std::vector<cvec> evecs;
    detail::jacobi_hermitian(h, evals, evecs);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return evals[a] < evals[b]; });
    frame.energies.resize(n);
    frame.states.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      frame.energies[i] = evals[order[i]];
      frame.states[i] = evecs[order[i]];
    }
    double scale = 0.0;
    for (double e : frame.energies) scale = std::max(scale, std::abs(e));
    scale = std::max(scale, h.frobenius_norm());
    detail::check_gap_ascending(frame.energies, scale);
  }

  frame.gauge_anchor.component.resize(n);
  frame.gauge_anchor.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::apply_largest_component_anchor(frame.states[i], frame.gauge_anchor.component[i],
                                           frame.gauge_anchor.magnitude[i]);
  }
  return frame;
}

// Optional isotropic harmonic trap for the slow particle. Not part of the
// physical setup (the plane motion is free); off by default.
struct TrapParams {
  bool enabled = false;
  double omega = 0.0;  // rad/s
};

// The concrete two-level model: a magnetic particle in the xy plane dipole-
// coupled to a spin-1/2 at distance d below the origin.
class SpinDipoleModel {
 public:
  explicit SpinDipoleModel(ModelParams p, TrapParams trap = {}) : p_(p), trap_(trap) {
    p_.validate();
  }

  std::size_t dim() const { return 2; }
  double hbar() const { return p_.hbar; }
  double mass() const { return p_.mass; }
  double length_scale() const { return p_.d; }
  const ModelParams& params() const { return p_; }
  const TrapParams& trap() const { return trap_; }

  FieldVector field(Vec2 q) const { return dipole_field(q.x, q.y, p_); }

  // |B| via the simplified closed form: the identity
  // 9 r^2 d^2 + (2d^2 - r^2)^2 = (d^2 + r^2)(4 d^2 + r^2) collapses the norm.
  double field_magnitude(double r) const {
    const double d2 = p_.d * p_.d;
    const double r2 = r * r;
    const double s = d2 + r2;
    return std::abs(p_.mu0_mF) * std::sqrt(4.0 * d2 + r2) / (4.0 * std::numbers::pi * s * s);
  }

  HermitianOperator hamiltonian(Vec2 q) const { return spin_hamiltonian(field(q), p_.mu); }

  // Position of the field-aligned band |+> (energy -mu*B) in the ascending
  // frame; constant because B > 0 everywhere.
  int aligned_band() const { return p_.mu > 0.0 ? 0 : 1; }

  // Eigenframe in the (theta,phi) gauge of the field direction, singular only
  // where the field points along +z (never reached at finite radius).
  EigenFrame eigenframe(Vec2 q) const {
    if (p_.mu == 0.0) throw DegenerateError("mu = 0: spin levels are degenerate");
    const FieldVector b = field(q);
    const double bmag = b.magnitude();
    const double theta = std::atan2(std::hypot(b.bx, b.by), b.bz);
    const double phi = std::atan2(b.by, b.bx);
    const double ch = std::cos(0.5 * theta);
    const double sh = std::sin(0.5 * theta);
    const cplx eip{std::cos(phi), std::sin(phi)};

    cvec plus = {ch * std::conj(eip), cplx{sh, 0.0}};   // energy -mu*B
    cvec minus = {cplx{sh, 0.0}, -ch * eip};            // energy +mu*B

    EigenFrame frame;
    frame.gauge_anchor.kind = GaugeAnchor::Kind::spherical_field;
    if (p_.mu > 0.0) {
      frame.energies = {-p_.mu * bmag, p_.mu * bmag};
      frame.states = {std::move(plus), std::move(minus)};
      frame.gauge_anchor.component = {1, 0};
    } else {
      frame.energies = {p_.mu * bmag, -p_.mu * bmag};
      frame.states = {std::move(minus), std::move(plus)};
      frame.gauge_anchor.component = {0, 1};
    }
    frame.gauge_anchor.magnitude = {sh, sh};
    return frame;
  }

  // Exact back-reaction force -grad <psi|H1(q)|psi>, bilinear in a raw
  // (not necessarily normalized) state.
  Vec2 mean_field_force(std::span<const cplx> psi, Vec2 q) const {
    const cplx cross = std::conj(psi[0]) * psi[1];
    const double sx = 2.0 * cross.real();
    const double sy = 2.0 * cross.imag();
    const double sz = std::norm(psi[0]) - std::norm(psi[1]);

    const double d = p_.d;
    const double r2 = q.x * q.x + q.y * q.y;
    const double s = d * d + r2;
    const double s72 = s * s * s * std::sqrt(s);
    const double c = -p_.mu0_mF / (4.0 * std::numbers::pi);

    const double dbx_dx = 3.0 * c * d * (s - 5.0 * q.x * q.x) / s72;
    const double dbx_dy = -15.0 * c * d * q.x * q.y / s72;
    const double dby_dx = dbx_dy;
    const double dby_dy = 3.0 * c * d * (s - 5.0 * q.y * q.y) / s72;
    const double dbz_dx = -3.0 * c * q.x * (4.0 * d * d - r2) / s72;
    const double dbz_dy = -3.0 * c * q.y * (4.0 * d * d - r2) / s72;

    // -d<H1>/dq = +mu * <sigma> . dB/dq
    return Vec2{p_.mu * (sx * dbx_dx + sy * dby_dx + sz * dbz_dx),
                p_.mu * (sx * dbx_dy + sy * dby_dy + sz * dbz_dy)};
  }

  double potential(Vec2 q) const {
    if (!trap_.enabled) return 0.0;
    return 0.5 * p_.mass * trap_.omega * trap_.omega * q.norm2();
  }

  Vec2 potential_gradient(Vec2 q) const {
    if (!trap_.enabled) return Vec2{0.0, 0.0};
    return p_.mass * trap_.omega * trap_.omega * q;
  }

  // Radial coefficient of the adiabatic gradient force: F = coef * (x, y),
  // with pop_diff = |a_-|^2 - |a_+|^2.
  double gradient_coefficient(double r, double pop_diff_minus_plus) const {
    const double d2 = p_.d * p_.d;
    const double r2 = r * r;
    const double s = d2 + r2;
    return 3.0 * p_.mu * p_.mu0_mF * (5.0 * d2 + r2) * pop_diff_minus_plus /
           (4.0 * std::numbers::pi * std::sqrt(4.0 * d2 + r2) * s * s * s);
  }

  // Curvature of the averaged vector potential (z component), with
  // pop_diff = |a_+|^2 - |a_-|^2. Independent of mu and mu0_mF.
  double curvature_closed_form(double r, double pop_diff_plus_minus) const {
    const double d2 = p_.d * p_.d;
    const double r2 = r * r;
    const double prod = (r2 + d2) * (r2 + 4.0 * d2);
    return 9.0 * p_.hbar * d2 * (r2 + 2.0 * d2) / (2.0 * prod * std::sqrt(prod)) *
           pop_diff_plus_minus;
  }

 private:
  ModelParams p_;
  TrapParams trap_;
};

template <class M>
concept HybridModel = requires(const M& m, Vec2 q) {
  { m.dim() } -> std::convertible_to<std::size_t>;
  { m.hbar() } -> std::convertible_to<double>;
  { m.mass() } -> std::convertible_to<double>;
  { m.length_scale() } -> std::convertible_to<double>;
  { m.hamiltonian(q) } -> std::convertible_to<HermitianOperator>;
  { m.eigenframe(q) } -> std::convertible_to<EigenFrame>;
  { m.potential(q) } -> std::convertible_to<double>;
  { m.potential_gradient(q) } -> std::convertible_to<Vec2>;
};

template <class M>
concept HasAnalyticForce = requires(const M& m, std::span<const cplx> psi, Vec2 q) {
  { m.mean_field_force(psi, q) } -> std::convertible_to<Vec2>;
};

// Back-reaction force on the classical particle: analytic where the model
// provides it, central finite difference of <psi|H1|psi> otherwise.
template <HybridModel M>
Vec2 mean_field_force(const M& model, std::span<const cplx> psi, Vec2 q) {
  if constexpr (HasAnalyticForce<M>) {
    return model.mean_field_force(psi, q);
  } else {
    const double h = 1e-6 * model.length_scale();
    const double exp_xp = model.hamiltonian(Vec2{q.x + h, q.y}).expectation(psi);
    const double exp_xm = model.hamiltonian(Vec2{q.x - h, q.y}).expectation(psi);
    const double exp_yp = model.hamiltonian(Vec2{q.x, q.y + h}).expectation(psi);
    const double exp_ym = model.hamiltonian(Vec2{q.x, q.y - h}).expectation(psi);
    return Vec2{-(exp_xp - exp_xm) / (2.0 * h), -(exp_yp - exp_ym) / (2.0 * h)};
  }
}

// Spectral spread of H1(q) over hbar; the Larmor rate 2|mu|B/hbar for the
// spin model.
template <HybridModel M>
double fast_frequency(const M& model, Vec2 q) {
  if constexpr (std::same_as<M, SpinDipoleModel>) {
    return 2.0 * std::abs(model.params().mu) * model.field_magnitude(q.norm()) / model.hbar();
  } else {
    const EigenFrame f = model.eigenframe(q);
    return (f.energies.back() - f.energies.front()) / model.hbar();
  }
}

}  // namespace berrydyn

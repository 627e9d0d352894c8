#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "berrydyn/errors.hpp"
#include "berrydyn/linalg.hpp"
#include "berrydyn/model.hpp"

namespace berrydyn {

// State vector of the fast N-level subsystem, unit norm to 1e-10.
class QuantumState {
 public:
  explicit QuantumState(cvec amps) : amps_(std::move(amps)) {
    const double n = vnorm(amps_);
    if (!(std::abs(n - 1.0) <= 1e-10)) {
      throw ValidationError("quantum state norm " + std::to_string(n) + " deviates from 1");
    }
  }

  std::size_t dim() const { return amps_.size(); }
  const cvec& amps() const { return amps_; }
  double norm() const { return vnorm(amps_); }

 private:
  cvec amps_;
};

// Canonical chart for the fast subsystem: I_n = hbar*|a_n|^2,
// Theta_n = -arg(a_n), angles wrapped to (-pi, pi].
struct ActionAngleState {
  std::vector<double> actions;
  std::vector<double> angles;
};

// d|psi>/dt = -(i/hbar) H1(q2) |psi>.
template <HybridModel M>
cvec schrodinger_rhs(std::span<const cplx> psi, Vec2 q2, const M& model) {
  cvec hpsi = model.hamiltonian(q2).apply(psi);
  const double inv_hbar = 1.0 / model.hbar();
  for (auto& z : hpsi) z = cplx{z.imag() * inv_hbar, -z.real() * inv_hbar};  // *(-i/hbar)
  return hpsi;
}

template <HybridModel M>
cvec schrodinger_rhs(const QuantumState& psi, Vec2 q2, const M& model) {
  return schrodinger_rhs(std::span<const cplx>(psi.amps()), q2, model);
}

// Populations below this have no defined phase; the angle is reported as 0.
inline constexpr double kZeroPopulation = 1e-30;

inline ActionAngleState to_action_angle(const QuantumState& psi, const EigenFrame& frame,
                                        double hbar) {
  const std::size_t n = frame.dim();
  ActionAngleState aa;
  aa.actions.resize(n);
  aa.angles.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx a = inner(frame.states[k], psi.amps());
    const double pop = std::norm(a);
    aa.actions[k] = hbar * pop;
    aa.angles[k] = pop < kZeroPopulation ? 0.0 : -std::arg(a);
  }
  return aa;
}

// Psi = sum_n sqrt(I_n/hbar) exp(-i Theta_n) |phi_n>, renormalized.
inline QuantumState from_action_angle(const ActionAngleState& aa, const EigenFrame& frame,
                                      double hbar) {
  const std::size_t n = frame.dim();
  double sum = 0.0;
  for (double i : aa.actions) {
    if (i < 0.0) throw BadActionsError("negative action");
    sum += i;
  }
  if (std::abs(sum - hbar) > 1e-8 * hbar) {
    throw BadActionsError("actions sum to " + std::to_string(sum / hbar) +
                          " hbar; expected 1 within 1e-8");
  }
  cvec psi(n, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const double amp = std::sqrt(aa.actions[k] / hbar);
    const cplx coeff = amp * cplx{std::cos(aa.angles[k]), -std::sin(aa.angles[k])};
    for (std::size_t j = 0; j < n; ++j) psi[j] += coeff * frame.states[k][j];
  }
  const double norm = vnorm(psi);
  for (auto& z : psi) z /= norm;
  return QuantumState(std::move(psi));
}

inline double wrap_angle(double a) {
  // to (-pi, pi]
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace berrydyn

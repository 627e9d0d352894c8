#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "berrydyn/errors.hpp"

namespace berrydyn {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
};

// <a|b> with the physics convention: conjugate on the left argument.
inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double norm2(std::span<const cplx> a) {
  double s = 0.0;
  for (const cplx& z : a) s += std::norm(z);
  return s;
}

inline double vnorm(std::span<const cplx> a) { return std::sqrt(norm2(a)); }

// Dense N x N Hermitian matrix, row-major. Mutation goes through set(),
// which mirrors the conjugate entry, so stored data is Hermitian bitwise.
class HermitianOperator {
 public:
  explicit HermitianOperator(std::size_t n) : n_(n), a_(n * n, cplx{0.0, 0.0}) {}

  // Validates Hermiticity of a raw matrix to 1e-14 relative.
  static HermitianOperator from_matrix(std::size_t n, std::span<const cplx> entries) {
    HermitianOperator h(n);
    double scale = 0.0;
    for (const cplx& z : entries) scale = std::max(scale, std::abs(z));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const cplx mismatch = entries[i * n + j] - std::conj(entries[j * n + i]);
        if (std::abs(mismatch) > 1e-14 * std::max(scale, 1e-300)) {
          throw ValidationError("matrix is not Hermitian to 1e-14 relative");
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      h.a_[i * n + i] = cplx{entries[i * n + i].real(), 0.0};
      for (std::size_t j = i + 1; j < n; ++j) {
        h.a_[i * n + j] = entries[i * n + j];
        h.a_[j * n + i] = std::conj(entries[i * n + j]);
      }
    }
    return h;
  }

  std::size_t dim() const { return n_; }

  cplx operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  // Sets (i,j) and mirrors (j,i) = conj. Diagonal imaginary parts are dropped.
  void set(std::size_t i, std::size_t j, cplx v) {
    if (i == j) {
      a_[i * n_ + i] = cplx{v.real(), 0.0};
    } else {
      a_[i * n_ + j] = v;
      a_[j * n_ + i] = std::conj(v);
    }
  }

  cvec apply(std::span<const cplx> v) const {
    cvec out(n_, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n_; ++i) {
      cplx s{0.0, 0.0};
      for (std::size_t j = 0; j < n_; ++j) s += a_[i * n_ + j] * v[j];
      out[i] = s;
    }
    return out;
  }

  // <v|H|v>, real by Hermiticity.
  double expectation(std::span<const cplx> v) const {
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) s += std::conj(v[i]) * a_[i * n_ + j] * v[j];
    }
    return s.real();
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }

  const cplx* data() const { return a_.data(); }

 private:
  std::size_t n_;
  cvec a_;
};

namespace detail {

// Cyclic complex Jacobi diagonalization. Deterministic sweep order, so equal
// inputs give bit-identical results. Adequate for the small N used here.
inline void jacobi_hermitian(const HermitianOperator& h, std::vector<double>& eigenvalues,
                             std::vector<cvec>& eigenvectors) {
  const std::size_t n = h.dim();
  std::vector<cplx> a(h.data(), h.data() + n * n);
  std::vector<cvec> v(n, cvec(n, cplx{0.0, 0.0}));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = cplx{1.0, 0.0};

  auto at = [&](std::size_t i, std::size_t j) -> cplx& { return a[i * n + j]; };

  const double scale = h.frobenius_norm();
  const double tol = 1e-15 * std::max(scale, 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(at(p, q));
    if (std::sqrt(off) <= tol) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = at(p, q);
        if (std::abs(apq) <= tol * 1e-2) continue;
        const double app = at(p, p).real();
        const double aqq = at(q, q).real();
        // Unitary 2x2 rotation annihilating a[p][q]: diagonalize the
        // [[app, apq],[conj(apq), aqq]] block.
        const double phi = std::arg(apq);
        const double m = std::abs(apq);
        const double theta = 0.5 * std::atan2(2.0 * m, app - aqq);
        const double c = std::cos(theta);
        const cplx s = std::sin(theta) * std::exp(cplx{0.0, phi});

        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = at(k, p);
          const cplx akq = at(k, q);
          at(k, p) = c * akp + std::conj(s) * akq;
          at(k, q) = -s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = at(p, k);
          const cplx aqk = at(q, k);
          at(p, k) = c * apk + s * aqk;
          at(q, k) = -std::conj(s) * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v[p][k];
          const cplx vkq = v[q][k];
          v[p][k] = c * vkp + std::conj(s) * vkq;
          v[q][k] = -s * vkp + c * vkq;
        }
      }
    }
  }

  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = at(i, i).real();
  eigenvectors = std::move(v);
}

}  // namespace detail

}  // namespace berrydyn

#pragma once

// Two-qubit density matrices and their Bloch / correlation-matrix data.
// Basis ordering is |00>, |01>, |10>, |11>; Pauli ordering is (X, Y, Z).

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bellbound/linalg.hpp"

namespace bellbound {

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidState : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace tol {
inline constexpr double kTrace = 1e-12;
inline constexpr double kPsd = -1e-10;
}  // namespace tol

namespace pauli {
inline ComplexMatrix identity() { return ComplexMatrix::identity(2); }
inline ComplexMatrix x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix y() { return {{0.0, cplx(0, -1)}, {cplx(0, 1), 0.0}}; }
inline ComplexMatrix z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

/// sigma_1, sigma_2, sigma_3 for index 0, 1, 2.
inline ComplexMatrix sigma(std::size_t i) {
  switch (i) {
    case 0: return x();
    case 1: return y();
    case 2: return z();
    default: throw OutOfRange("pauli index must be 0, 1 or 2");
  }
}

/// v . sigma for a real 3-vector.
inline ComplexMatrix dot_sigma(const Vec3& v) {
  return ComplexMatrix{{v[2], cplx(v[0], -v[1])}, {cplx(v[0], v[1]), -v[2]}};
}
}  // namespace pauli

inline double trace_real(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Re tr(A B) without forming the product.
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) s += (a(i, k) * b(k, i)).real();
  return s;
}

class TwoQubitState {
 public:
  /// Validates hermiticity, unit trace and positivity.
  static TwoQubitState from_density(ComplexMatrix rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw InvalidState("two-qubit state must be 4x4");
    if (hermiticity_error(rho) > tol::kHermitian) throw InvalidState("density matrix is not Hermitian");
    const cplx tr = rho.trace();
    if (std::abs(tr - cplx(1.0)) > tol::kTrace) throw InvalidState("density matrix trace is not 1");
    if (min_eigenvalue(rho) < tol::kPsd) throw InvalidState("density matrix is not positive semidefinite");
    return TwoQubitState(std::move(rho));
  }

  /// No validation. Test use only.
  static TwoQubitState unchecked(ComplexMatrix rho) { return TwoQubitState(std::move(rho)); }

  const ComplexMatrix& rho() const { return rho_; }

  double purity() const { return trace_real(rho_, rho_); }

 private:
  explicit TwoQubitState(ComplexMatrix rho) : rho_(std::move(rho)) {}
  ComplexMatrix rho_;
};

inline ComplexMatrix projector(std::span<const cplx> psi) {
  ComplexMatrix p(psi.size(), psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) p(i, j) = psi[i] * std::conj(psi[j]);
  return p;
}

/// cos(theta)|00> + sin(theta)|11>, theta in [0, pi/4].
inline TwoQubitState pure_state(double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 4 + 1e-15))
    throw OutOfRange("theta must lie in [0, pi/4]");
  const std::array<cplx, 4> psi{std::cos(theta), 0.0, 0.0, std::sin(theta)};
  return TwoQubitState::from_density(projector(psi));
}

/// p |phi+><phi+| + (1 - p) I/4.
inline TwoQubitState werner_state(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange("p must lie in [0, 1]");
  const double h = 1.0 / std::numbers::sqrt2;
  const std::array<cplx, 4> phi{h, 0.0, 0.0, h};
  ComplexMatrix rho = projector(phi) * cplx(p) + ComplexMatrix::identity(4) * cplx((1.0 - p) / 4.0);
  return TwoQubitState::from_density(std::move(rho));
}

/// (|01> - |10>)/sqrt(2).
inline TwoQubitState singlet() {
  const double h = 1.0 / std::numbers::sqrt2;
  const std::array<cplx, 4> psi{0.0, h, -h, 0.0};
  return TwoQubitState::from_density(projector(psi));
}

/// q |psi><psi| + (1 - q) I/4 for any normalized two-qubit vector psi.
inline TwoQubitState noisy_pure_state(std::span<const cplx> psi, double q) {
  if (psi.size() != 4) throw DimensionMismatch("two-qubit vector must have 4 entries");
  if (!(q >= 0.0 && q <= 1.0)) throw OutOfRange("mixing weight must lie in [0, 1]");
  ComplexMatrix rho = projector(psi) * cplx(q) + ComplexMatrix::identity(4) * cplx((1.0 - q) / 4.0);
  return TwoQubitState::from_density(std::move(rho));
}

struct CorrelationData {
  Vec3 r{};        // Alice Bloch vector
  Vec3 s{};        // Bob Bloch vector
  RealMatrix3 t;   // t_ij = tr(sigma_i (x) sigma_j rho)
};

inline CorrelationData correlation_data(const TwoQubitState& state) {
  const ComplexMatrix& rho = state.rho();
  const ComplexMatrix id = pauli::identity();
  CorrelationData out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.r[i] = trace_real(kron(pauli::sigma(i), id), rho);
    out.s[i] = trace_real(kron(id, pauli::sigma(i)), rho);
    for (std::size_t j = 0; j < 3; ++j) out.t(i, j) = trace_real(kron(pauli::sigma(i), pauli::sigma(j)), rho);
  }
  return out;
}

/// rho = (I + r.sigma (x) I + I (x) s.sigma + sum t_ij sigma_i (x) sigma_j) / 4.
inline ComplexMatrix reconstruct_density(const CorrelationData& c) {
  const ComplexMatrix id = pauli::identity();
  ComplexMatrix rho = ComplexMatrix::identity(4);
  for (std::size_t i = 0; i < 3; ++i) {
    rho += kron(pauli::sigma(i), id) * cplx(c.r[i]);
    rho += kron(id, pauli::sigma(i)) * cplx(c.s[i]);
    for (std::size_t j = 0; j < 3; ++j) rho += kron(pauli::sigma(i), pauli::sigma(j)) * cplx(c.t(i, j));
  }
  return rho * cplx(0.25);
}

}  // namespace bellbound

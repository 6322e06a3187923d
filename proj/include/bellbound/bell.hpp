#pragma once

// Bell expressions over dichotomic qubit observables A = a.sigma, B = b.sigma:
// expectation values, classical bounds, the singular-value bound for the
// elegant Bell expression, its optimal measurements, and a see-saw oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bellbound/linalg.hpp"
#include "bellbound/states.hpp"

namespace bellbound {

class DegenerateState : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TooManySettings : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoCrossing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double kUnitVector = 1e-12;
inline constexpr double kTightness = 1e-8;
inline constexpr double kSeesawDelta = 1e-12;
inline constexpr int kSeesawMaxRounds = 500;
inline constexpr int kMaxEnumeratedSettings = 24;
}  // namespace tol

/// sum_kl c_kl <A_k B_l> + sum_k alpha_k <A_k> + sum_l beta_l <B_l>.
struct BellExpression {
  std::string name;
  RealMatrix correlators;             // alice_settings x bob_settings
  std::vector<double> alice_marginals;  // alpha_k
  std::vector<double> bob_marginals;    // beta_l

  std::size_t alice_settings() const { return correlators.rows(); }
  std::size_t bob_settings() const { return correlators.cols(); }

  bool has_marginals() const {
    auto nz = [](double v) { return v != 0.0; };
    return std::any_of(alice_marginals.begin(), alice_marginals.end(), nz) ||
           std::any_of(bob_marginals.begin(), bob_marginals.end(), nz);
  }

  static BellExpression from_correlators(std::string name, RealMatrix c) {
    BellExpression e{std::move(name), std::move(c), {}, {}};
    e.alice_marginals.assign(e.alice_settings(), 0.0);
    e.bob_marginals.assign(e.bob_settings(), 0.0);
    return e;
  }
};

inline BellExpression ebi() {
  return BellExpression::from_correlators("ebi", RealMatrix{{1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}});
}

inline BellExpression chsh() { return BellExpression::from_correlators("chsh", RealMatrix{{1, 1}, {1, -1}}); }

/// sum_i (A_i B_i + A_{i+1} B_i) with A_{n+1} = -A_1.
inline BellExpression chained(std::size_t n) {
  if (n < 2) throw OutOfRange("chained expression needs at least 2 settings");
  RealMatrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    c(i, i) += 1.0;
    if (i + 1 < n)
      c(i + 1, i) += 1.0;
    else
      c(0, i) -= 1.0;
  }
  return BellExpression::from_correlators("chained" + std::to_string(n), std::move(c));
}

inline bool is_ebi(const BellExpression& e) {
  return !e.has_marginals() && e.correlators.rows() == 3 && e.correlators.cols() == 4 &&
         e.correlators == ebi().correlators;
}

struct MeasurementStrategy {
  std::vector<Vec3> alice;
  std::vector<Vec3> bob;

  void validate() const {
    auto check = [](const std::vector<Vec3>& vs) {
      for (const auto& v : vs)
        if (std::abs(norm(v) - 1.0) > tol::kUnitVector) throw std::invalid_argument("measurement vector is not unit");
    };
    check(alice);
    check(bob);
  }
};

inline void check_shape(const BellExpression& e, const MeasurementStrategy& s) {
  if (s.alice.size() != e.alice_settings() || s.bob.size() != e.bob_settings())
    throw DimensionMismatch("strategy setting counts do not match the Bell expression");
}

/// Signed value of the expression, computed from a_k^T T b_l and Bloch vectors.
inline double expectation(const CorrelationData& cd, const BellExpression& e, const MeasurementStrategy& s) {
  check_shape(e, s);
  s.validate();
  double v = 0.0;
  for (std::size_t k = 0; k < e.alice_settings(); ++k) {
    const Vec3 ta = cd.t.transpose().apply(s.alice[k]);
    for (std::size_t l = 0; l < e.bob_settings(); ++l) v += e.correlators(k, l) * dot(ta, s.bob[l]);
    v += e.alice_marginals[k] * dot(cd.r, s.alice[k]);
  }
  for (std::size_t l = 0; l < e.bob_settings(); ++l) v += e.bob_marginals[l] * dot(cd.s, s.bob[l]);
  return v;
}

inline double expectation(const TwoQubitState& st, const BellExpression& e, const MeasurementStrategy& s) {
  return expectation(correlation_data(st), e, s);
}

/// Same value via tr(rho S) with the Bell operator built explicitly.
inline double expectation_operator(const TwoQubitState& st, const BellExpression& e, const MeasurementStrategy& s) {
  check_shape(e, s);
  s.validate();
  const ComplexMatrix id = pauli::identity();
  ComplexMatrix op(4, 4);
  for (std::size_t k = 0; k < e.alice_settings(); ++k) {
    const ComplexMatrix ak = pauli::dot_sigma(s.alice[k]);
    for (std::size_t l = 0; l < e.bob_settings(); ++l)
      if (e.correlators(k, l) != 0.0) op += kron(ak, pauli::dot_sigma(s.bob[l])) * cplx(e.correlators(k, l));
    if (e.alice_marginals[k] != 0.0) op += kron(ak, id) * cplx(e.alice_marginals[k]);
  }
  for (std::size_t l = 0; l < e.bob_settings(); ++l)
    if (e.bob_marginals[l] != 0.0) op += kron(id, pauli::dot_sigma(s.bob[l])) * cplx(e.bob_marginals[l]);
  return trace_real(st.rho(), op);
}

/// Maximum over deterministic +-1 assignments, enumerated exhaustively.
inline double classical_bound(const BellExpression& e) {
  const std::size_t k = e.alice_settings(), l = e.bob_settings();
  if (static_cast<int>(k + l) > tol::kMaxEnumeratedSettings)
    throw TooManySettings("classical_bound enumeration limited to 24 settings in total");
  double best = -std::numeric_limits<double>::infinity();
  const std::uint64_t total = std::uint64_t{1} << (k + l);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    auto sign = [&](std::size_t bit) { return (mask >> bit) & 1U ? -1.0 : 1.0; };
    double v = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      const double a = sign(x);
      for (std::size_t y = 0; y < l; ++y) v += e.correlators(x, y) * a * sign(k + y);
      v += e.alice_marginals[x] * a;
    }
    for (std::size_t y = 0; y < l; ++y) v += e.bob_marginals[y] * sign(k + y);
    best = std::max(best, v);
  }
  return best;
}

inline SvdResult3 correlation_svd(const TwoQubitState& st) { return svd3(correlation_data(st).t); }

/// 4 sqrt(l1^2 + l2^2 + l3^2) from the singular values of T.
inline double tight_bound(const SvdResult3& svd) {
  const auto& l = svd.singular_values;
  return 4.0 * std::sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2]);
}

inline double tight_bound(const TwoQubitState& st) { return tight_bound(correlation_svd(st)); }

namespace detail {
inline Vec3 normalized(const Vec3& v) { return scaled(v, 1.0 / norm(v)); }

/// Bob's combinations b1+b2-b3-b4, b1-b2+b3-b4, b1-b2-b3+b4 (rows of the
/// elegant expression applied to Bob's vectors).
inline std::array<Vec3, 3> ebi_bob_combinations(const std::vector<Vec3>& bob) {
  const RealMatrix c = ebi().correlators;
  std::array<Vec3, 3> d{};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 4; ++l) d[k] = d[k] + scaled(bob[l], c(k, l));
  return d;
}
}  // namespace detail

/// Measurements saturating the singular-value bound for the elegant expression.
/// Bob's vectors are built in the right-singular basis of T; Alice's are the
/// normalized images of Bob's combinations under T.
inline MeasurementStrategy optimal_measurements(const TwoQubitState& st) {
  const CorrelationData cd = correlation_data(st);
  const SvdResult3 svd = svd3(cd.t);
  const auto& lam = svd.singular_values;
  const double scale = std::sqrt(lam[0] * lam[0] + lam[1] * lam[1] + lam[2] * lam[2]);
  if (lam[0] < 1e-12) throw DegenerateState("correlation matrix has no nonzero singular value");

  // Coordinates in the right-singular basis.
  const std::array<Vec3, 4> coords{Vec3{lam[0], -lam[1], lam[2]}, Vec3{lam[0], lam[1], -lam[2]},
                                   Vec3{-lam[0], -lam[1], -lam[2]}, Vec3{-lam[0], lam[1], lam[2]}};
  MeasurementStrategy s;
  for (const auto& c : coords) {
    Vec3 b{};
    for (std::size_t k = 0; k < 3; ++k) b = b + scaled(svd.right_vectors[k], c[k] / scale);
    s.bob.push_back(detail::normalized(b));
  }

  // Combination k is 4 lam_k / scale along +-v_k, so its image is along +-u_k.
  const std::array<double, 3> sign{1.0, -1.0, 1.0};
  const auto d = detail::ebi_bob_combinations(s.bob);
  for (std::size_t k = 0; k < 3; ++k) {
    const Vec3 img = cd.t.apply(d[k]);
    const double n = norm(img);
    s.alice.push_back(n > 1e-12 ? scaled(img, 1.0 / n) : scaled(svd.left_vectors[k], sign[k]));
  }
  return s;
}

struct TightnessReport {
  bool proportionality_ok = false;
  double gram_sum = 0.0;
  bool gram_sum_ok = false;
  bool alice_aligned = false;
  double bound_gap = 0.0;

  bool all_ok() const { return proportionality_ok && gram_sum_ok && alice_aligned; }
};

/// Checks the saturation conditions of the singular-value bound for a
/// strategy on the elegant expression. Alice alignment accepts a common
/// global sign, since the bound is on |<S>|.
inline TightnessReport tightness_check(const TwoQubitState& st, const MeasurementStrategy& s) {
  const BellExpression e = ebi();
  check_shape(e, s);
  const CorrelationData cd = correlation_data(st);
  const SvdResult3 svd = svd3(cd.t);
  const RealMatrix3 tt = cd.t.transpose() * cd.t;
  const auto d = detail::ebi_bob_combinations(s.bob);

  TightnessReport rep;

  std::array<double, 3> len{}, seen{};
  bool singular_vectors = true;
  for (std::size_t k = 0; k < 3; ++k) {
    len[k] = norm(d[k]);
    seen[k] = len[k] > 1e-12 ? norm(cd.t.apply(d[k])) / len[k] : 0.0;
    const Vec3 resid = tt.apply(d[k]) - scaled(d[k], seen[k] * seen[k]);
    if (norm(resid) > tol::kTightness * std::max(1.0, len[k])) singular_vectors = false;
  }
  std::array<double, 3> sorted = seen;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  bool matches = true;
  for (std::size_t k = 0; k < 3; ++k)
    if (std::abs(sorted[k] - svd.singular_values[k]) > tol::kTightness) matches = false;
  bool ratios = true;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      if (std::abs(seen[i] * len[j] - seen[j] * len[i]) > tol::kTightness) ratios = false;
  rep.proportionality_ok = singular_vectors && matches && ratios;

  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) rep.gram_sum += dot(s.bob[i], s.bob[j]);
  rep.gram_sum_ok = std::abs(rep.gram_sum + 2.0) <= tol::kTightness;

  // A zero image leaves a_k unconstrained, but at least one setting has to
  // carry weight for the strategy to be aligned with anything.
  bool aligned = true, anti = true, any = false;
  for (std::size_t k = 0; k < 3; ++k) {
    const Vec3 img = cd.t.apply(d[k]);
    const double n = norm(img);
    if (n <= 1e-12) continue;
    any = true;
    const Vec3 g = scaled(img, 1.0 / n);
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::abs(s.alice[k][i] - g[i]) > tol::kTightness) aligned = false;
      if (std::abs(s.alice[k][i] + g[i]) > tol::kTightness) anti = false;
    }
  }
  rep.alice_aligned = any && (aligned || anti);
  rep.bound_gap = tight_bound(svd) - std::abs(expectation(cd, e, s));
  return rep;
}

// ---------------------------------------------------------------------------
// See-saw

struct SeesawResult {
  double value = 0.0;
  MeasurementStrategy strategy;
};

namespace detail {
inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = norm(v);
    if (n > 1e-8) return scaled(v, 1.0 / n);
  }
}
}  // namespace detail

/// Alternating closed-form updates: with Bob fixed each a_k is the unit vector
/// along its linear coefficient, and likewise for Bob. Best over restarts.
inline SeesawResult seesaw_max_violation(const CorrelationData& cd, const BellExpression& e, int restarts,
                                         std::uint64_t seed) {
  if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  const std::size_t k = e.alice_settings(), l = e.bob_settings();
  const RealMatrix3 tt = cd.t.transpose();
  std::mt19937_64 rng(seed);

  SeesawResult best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    MeasurementStrategy s;
    s.alice.assign(k, Vec3{0, 0, 1});
    for (std::size_t y = 0; y < l; ++y) s.bob.push_back(detail::random_unit(rng));
    double prev = -std::numeric_limits<double>::infinity();
    double value = prev;
    for (int round = 0; round < tol::kSeesawMaxRounds; ++round) {
      for (std::size_t x = 0; x < k; ++x) {
        Vec3 b{};
        for (std::size_t y = 0; y < l; ++y) b = b + scaled(s.bob[y], e.correlators(x, y));
        const Vec3 coef = cd.t.apply(b) + scaled(cd.r, e.alice_marginals[x]);
        const double n = norm(coef);
        if (n > 1e-300) s.alice[x] = scaled(coef, 1.0 / n);
      }
      for (std::size_t y = 0; y < l; ++y) {
        Vec3 a{};
        for (std::size_t x = 0; x < k; ++x) a = a + scaled(s.alice[x], e.correlators(x, y));
        const Vec3 coef = tt.apply(a) + scaled(cd.s, e.bob_marginals[y]);
        const double n = norm(coef);
        if (n > 1e-300) s.bob[y] = scaled(coef, 1.0 / n);
      }
      value = expectation(cd, e, s);
      if (std::abs(value - prev) < tol::kSeesawDelta) break;
      prev = value;
    }
    if (value > best.value) {
      best.value = value;
      best.strategy = std::move(s);
    }
  }
  return best;
}

inline SeesawResult seesaw_max_violation(const TwoQubitState& st, const BellExpression& e, int restarts,
                                         std::uint64_t seed) {
  return seesaw_max_violation(correlation_data(st), e, restarts, seed);
}

inline constexpr int kDefaultSeesawRestarts = 20;
inline constexpr std::uint64_t kDefaultSeed = 20240724;

/// Maximal violation: the closed-form bound for the elegant expression, the
/// see-saw value for anything else.
inline double max_violation(const TwoQubitState& st, const BellExpression& e, std::uint64_t seed = kDefaultSeed) {
  if (is_ebi(e)) return tight_bound(st);
  return seesaw_max_violation(st, e, kDefaultSeesawRestarts, seed).value;
}

// ---------------------------------------------------------------------------
// Behaviors

/// p(ab|xy) for a, b in {0, 1}; outcome 0 is the +1 eigenvalue.
struct Behavior {
  std::size_t alice_settings = 0;
  std::size_t bob_settings = 0;
  std::vector<double> table;

  double operator()(std::size_t a, std::size_t b, std::size_t x, std::size_t y) const {
    return table[((x * bob_settings + y) * 2 + a) * 2 + b];
  }
  double& operator()(std::size_t a, std::size_t b, std::size_t x, std::size_t y) {
    return table[((x * bob_settings + y) * 2 + a) * 2 + b];
  }

  double correlator(std::size_t x, std::size_t y) const {
    return (*this)(0, 0, x, y) - (*this)(0, 1, x, y) - (*this)(1, 0, x, y) + (*this)(1, 1, x, y);
  }
  double alice_marginal(std::size_t a, std::size_t x, std::size_t y) const {
    return (*this)(a, 0, x, y) + (*this)(a, 1, x, y);
  }
  double bob_marginal(std::size_t b, std::size_t x, std::size_t y) const {
    return (*this)(0, b, x, y) + (*this)(1, b, x, y);
  }

  /// Largest deviation from no-signaling over all marginals.
  double signaling() const {
    double worst = 0.0;
    for (std::size_t x = 0; x < alice_settings; ++x)
      for (std::size_t y = 1; y < bob_settings; ++y)
        for (std::size_t a = 0; a < 2; ++a)
          worst = std::max(worst, std::abs(alice_marginal(a, x, y) - alice_marginal(a, x, 0)));
    for (std::size_t y = 0; y < bob_settings; ++y)
      for (std::size_t x = 1; x < alice_settings; ++x)
        for (std::size_t b = 0; b < 2; ++b)
          worst = std::max(worst, std::abs(bob_marginal(b, x, y) - bob_marginal(b, 0, y)));
    return worst;
  }

  double bell_value(const BellExpression& e) const {
    double v = 0.0;
    for (std::size_t x = 0; x < alice_settings; ++x)
      for (std::size_t y = 0; y < bob_settings; ++y) v += e.correlators(x, y) * correlator(x, y);
    for (std::size_t x = 0; x < alice_settings; ++x)
      v += e.alice_marginals[x] * (alice_marginal(0, x, 0) - alice_marginal(1, x, 0));
    for (std::size_t y = 0; y < bob_settings; ++y)
      v += e.bob_marginals[y] * (bob_marginal(0, 0, y) - bob_marginal(1, 0, y));
    return v;
  }
};

inline Behavior behavior_from(const TwoQubitState& st, const MeasurementStrategy& s) {
  Behavior b;
  b.alice_settings = s.alice.size();
  b.bob_settings = s.bob.size();
  b.table.assign(b.alice_settings * b.bob_settings * 4, 0.0);
  const ComplexMatrix id = pauli::identity();
  auto proj = [&](const Vec3& v, std::size_t outcome) {
    const double sgn = outcome == 0 ? 0.5 : -0.5;
    return id * cplx(0.5) + pauli::dot_sigma(v) * cplx(sgn);
  };
  for (std::size_t x = 0; x < b.alice_settings; ++x)
    for (std::size_t y = 0; y < b.bob_settings; ++y)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t o = 0; o < 2; ++o)
          b(a, o, x, y) = trace_real(st.rho(), kron(proj(s.alice[x], a), proj(s.bob[y], o)));
  return b;
}

// ---------------------------------------------------------------------------
// Violation thresholds along one-parameter families

enum class StateFamily { PureTheta, WernerP };

inline std::pair<double, double> family_domain(StateFamily f) {
  return f == StateFamily::PureTheta ? std::pair{0.0, std::numbers::pi / 4} : std::pair{0.0, 1.0};
}

inline TwoQubitState family_state(StateFamily f, double param) {
  return f == StateFamily::PureTheta ? pure_state(param) : werner_state(param);
}

/// Smallest family parameter at which the maximal violation reaches the
/// classical bound, by bisection to 1e-6 or better.
inline double violation_threshold(StateFamily f, const BellExpression& e, std::uint64_t seed = kDefaultSeed) {
  const double cb = classical_bound(e);
  auto excess = [&](double p) { return max_violation(family_state(f, p), e, seed) - cb; };
  auto [lo, hi] = family_domain(f);
  if (excess(hi) <= 0.0) throw NoCrossing("maximal violation never exceeds the classical bound");
  if (excess(lo) >= 0.0) return lo;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace bellbound

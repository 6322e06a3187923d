#pragma once

// NPA moment-matrix relaxations for bipartite scenarios with two outcomes per
// setting. Each setting contributes one projector (the +1 outcome); Alice's
// projectors commute with Bob's, and projectors are idempotent. Bell
// expressions and outcome probabilities are linear in the moments, so both
// Tsirelson bounds and guessing probabilities are single-block SDPs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bellbound/bell.hpp"
#include "bellbound/parallel.hpp"
#include "bellbound/sdp.hpp"

namespace bellbound {

class UnsupportedLevel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleValue : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::size_t alice_settings = 1;
  std::size_t bob_settings = 1;

  static Scenario of(const BellExpression& e) { return {e.alice_settings(), e.bob_settings()}; }
};

enum class NpaLevel { One, OnePlusAB, Two };

inline const char* to_string(NpaLevel l) {
  switch (l) {
    case NpaLevel::One: return "1";
    case NpaLevel::OnePlusAB: return "1+AB";
    case NpaLevel::Two: return "2";
  }
  return "?";
}

inline NpaLevel parse_level(const std::string& s) {
  if (s == "1") return NpaLevel::One;
  if (s == "1+AB" || s == "1+ab") return NpaLevel::OnePlusAB;
  if (s == "2" || s == "Q2" || s == "q2") return NpaLevel::Two;
  throw UnsupportedLevel("unsupported NPA level '" + s + "' (expected 1, 1+AB or 2)");
}

/// Operator word with Alice's projectors first; entries are setting indices.
struct Monomial {
  std::vector<std::uint8_t> alice;
  std::vector<std::uint8_t> bob;

  std::size_t length() const { return alice.size() + bob.size(); }
  bool is_identity() const { return alice.empty() && bob.empty(); }

  Monomial adjoint() const {
    return {std::vector<std::uint8_t>(alice.rbegin(), alice.rend()),
            std::vector<std::uint8_t>(bob.rbegin(), bob.rend())};
  }

  auto operator<=>(const Monomial&) const = default;
};

namespace detail {
inline void squash_repeats(std::vector<std::uint8_t>& w) {
  w.erase(std::unique(w.begin(), w.end()), w.end());
}
}  // namespace detail

/// Word reduced by idempotence.
inline Monomial reduce(Monomial w) {
  detail::squash_repeats(w.alice);
  detail::squash_repeats(w.bob);
  return w;
}

/// u^dagger v, reduced.
inline Monomial product_adjoint(const Monomial& u, const Monomial& v) {
  Monomial w = u.adjoint();
  w.alice.insert(w.alice.end(), v.alice.begin(), v.alice.end());
  w.bob.insert(w.bob.end(), v.bob.begin(), v.bob.end());
  return reduce(std::move(w));
}

/// Representative of {w, w^dagger}: moments are taken real, so <w> = <w^dagger>.
inline Monomial canonical(const Monomial& w) {
  Monomial r = reduce(w);
  Monomial a = r.adjoint();
  return std::min(r, a);
}

inline std::string to_string(const Monomial& w) {
  if (w.is_identity()) return "1";
  std::string s;
  for (auto x : w.alice) s += "A" + std::to_string(x + 1);
  for (auto y : w.bob) s += "B" + std::to_string(y + 1);
  return s;
}

/// Moment-matrix index structure. Class 0 is the identity moment, pinned to 1.
class MomentStructure {
 public:
  MomentStructure(Scenario sc, NpaLevel level) : scenario_(sc), level_(level) {
    if (sc.alice_settings < 1 || sc.bob_settings < 1) throw std::invalid_argument("scenario needs settings");
    const auto k = static_cast<std::uint8_t>(sc.alice_settings);
    const auto l = static_cast<std::uint8_t>(sc.bob_settings);
    monomials_.push_back({});
    for (std::uint8_t x = 0; x < k; ++x) monomials_.push_back({{x}, {}});
    for (std::uint8_t y = 0; y < l; ++y) monomials_.push_back({{}, {y}});
    if (level == NpaLevel::Two) {
      for (std::uint8_t x = 0; x < k; ++x)
        for (std::uint8_t x2 = 0; x2 < k; ++x2)
          if (x != x2) monomials_.push_back({{x, x2}, {}});
      for (std::uint8_t y = 0; y < l; ++y)
        for (std::uint8_t y2 = 0; y2 < l; ++y2)
          if (y != y2) monomials_.push_back({{}, {y, y2}});
    }
    if (level == NpaLevel::OnePlusAB || level == NpaLevel::Two) {
      for (std::uint8_t x = 0; x < k; ++x)
        for (std::uint8_t y = 0; y < l; ++y) monomials_.push_back({{x}, {y}});
    }

    const std::size_t m = monomials_.size();
    class_of_.assign(m * m, 0);
    classes_.push_back(Monomial{});
    index_[Monomial{}] = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) {
        const Monomial w = canonical(product_adjoint(monomials_[i], monomials_[j]));
        auto [it, inserted] = index_.try_emplace(w, classes_.size());
        if (inserted) classes_.push_back(w);
        class_of_[i * m + j] = class_of_[j * m + i] = it->second;
      }
  }

  const Scenario& scenario() const { return scenario_; }
  NpaLevel level() const { return level_; }
  std::size_t size() const { return monomials_.size(); }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  std::size_t class_count() const { return classes_.size(); }
  const Monomial& class_word(std::size_t c) const { return classes_[c]; }
  std::size_t class_of(std::size_t i, std::size_t j) const { return class_of_[i * size() + j]; }

  std::optional<std::size_t> find_class(const Monomial& w) const {
    auto it = index_.find(canonical(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_class(const Monomial& w) const {
    auto c = find_class(w);
    if (!c) throw std::logic_error("moment " + to_string(w) + " is not present at this level");
    return *c;
  }

  /// Moment matrix for moment values indexed by class (values[0] is ignored and taken as 1).
  RealMatrix moment_matrix(std::span<const double> values) const {
    if (values.size() != class_count()) throw DimensionMismatch("one value per moment class expected");
    const std::size_t m = size();
    RealMatrix out(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t c = class_of(i, j);
        out(i, j) = c == 0 ? 1.0 : values[c];
      }
    return out;
  }

 private:
  Scenario scenario_;
  NpaLevel level_;
  std::vector<Monomial> monomials_;
  std::vector<Monomial> classes_;
  std::map<Monomial, std::size_t> index_;
  std::vector<std::size_t> class_of_;
};

inline MomentStructure build_moment_structure(Scenario sc, NpaLevel level) { return MomentStructure(sc, level); }

/// constant + sum_c coeff[c] * moment[c], with moment[0] = 1.
struct MomentForm {
  double constant = 0.0;
  std::vector<double> coeff;

  explicit MomentForm(std::size_t classes = 0) : coeff(classes, 0.0) {}

  MomentForm& add(std::size_t c, double v) {
    coeff[c] += v;
    return *this;
  }

  double evaluate(std::span<const double> moments) const {
    double s = constant + coeff[0];
    for (std::size_t c = 1; c < coeff.size(); ++c) s += coeff[c] * moments[c];
    return s;
  }
};

/// p(ab|xy) with outcome 0 the projector's range: P(00) = <E F>,
/// P(01) = <E> - <E F>, P(10) = <F> - <E F>, P(11) = 1 - <E> - <F> + <E F>.
inline MomentForm probability_form(const MomentStructure& ms, std::size_t a, std::size_t b, std::size_t x,
                                   std::size_t y) {
  const auto ux = static_cast<std::uint8_t>(x), uy = static_cast<std::uint8_t>(y);
  const std::size_t e = ms.require_class({{ux}, {}});
  const std::size_t f = ms.require_class({{}, {uy}});
  const std::size_t ef = ms.require_class({{ux}, {uy}});
  const double sa = a == 0 ? 1.0 : -1.0;
  const double sb = b == 0 ? 1.0 : -1.0;
  MomentForm p(ms.class_count());
  p.add(ef, sa * sb);
  p.add(e, sa * (b == 0 ? 0.0 : 1.0));
  p.add(f, sb * (a == 0 ? 0.0 : 1.0));
  p.constant = (a == 1 && b == 1) ? 1.0 : 0.0;
  return p;
}

/// Bell expression with A_x = 2 E_x - 1 and B_y = 2 F_y - 1.
inline MomentForm bell_form(const MomentStructure& ms, const BellExpression& e) {
  const auto& sc = ms.scenario();
  if (sc.alice_settings != e.alice_settings() || sc.bob_settings != e.bob_settings())
    throw DimensionMismatch("Bell expression does not match the scenario");
  MomentForm f(ms.class_count());
  for (std::size_t x = 0; x < sc.alice_settings; ++x) {
    const auto ux = static_cast<std::uint8_t>(x);
    double e_coeff = 2.0 * e.alice_marginals[x];
    f.constant -= e.alice_marginals[x];
    for (std::size_t y = 0; y < sc.bob_settings; ++y) {
      const double c = e.correlators(x, y);
      if (c == 0.0) continue;
      const auto uy = static_cast<std::uint8_t>(y);
      // c <A_x B_y> = c (4 E F - 2 E - 2 F + 1)
      f.add(ms.require_class({{ux}, {uy}}), 4.0 * c);
      f.add(ms.require_class({{}, {uy}}), -2.0 * c);
      e_coeff -= 2.0 * c;
      f.constant += c;
    }
    f.add(ms.require_class({{ux}, {}}), e_coeff);
  }
  for (std::size_t y = 0; y < sc.bob_settings; ++y) {
    f.add(ms.require_class({{}, {static_cast<std::uint8_t>(y)}}), 2.0 * e.bob_marginals[y]);
    f.constant -= e.bob_marginals[y];
  }
  return f;
}

enum class BellConstraint { Equality, AtLeast };

struct MomentSdpResult {
  double value = 0.0;            // optimum of the objective form
  std::vector<double> moments;   // per class, moments[0] = 1
  SdpSolution solution;
};

/// Maximizes `objective` over moment matrices M >= 0, optionally subject to
/// `constraint` (== or >=) `target`.
inline MomentSdpResult maximize_moments(const MomentStructure& ms, const MomentForm& objective,
                                        const MomentForm* constraint = nullptr, double target = 0.0,
                                        BellConstraint kind = BellConstraint::Equality, const SdpOptions& opt = {}) {
  const std::size_t m = ms.size();
  const std::size_t classes = ms.class_count();
  const bool slack_block = constraint != nullptr && kind == BellConstraint::AtLeast;
  const std::size_t n = m + (slack_block ? 1 : 0);

  std::vector<RealMatrix> f(classes, RealMatrix(n, n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) f[ms.class_of(i, j)](i, j) = 1.0;

  std::vector<double> obj = objective.coeff;
  double obj_const = objective.constant + obj[0];
  RealMatrix base = f[0];

  std::size_t pivot = 0;
  double pivot_coeff = 0.0;
  double kappa = 0.0;
  if (constraint != nullptr && kind == BellConstraint::Equality) {
    for (std::size_t c = 1; c < classes; ++c)
      if (std::abs(constraint->coeff[c]) > std::abs(pivot_coeff)) {
        pivot = c;
        pivot_coeff = constraint->coeff[c];
      }
    if (pivot == 0) throw std::invalid_argument("constraint does not depend on any moment");
    // moment[pivot] = kappa - sum_{c != pivot} (g_c / g_pivot) moment[c]
    kappa = (target - constraint->constant - constraint->coeff[0]) / pivot_coeff;
    base += f[pivot] * kappa;
    obj_const += obj[pivot] * kappa;
    for (std::size_t c = 1; c < classes; ++c) {
      if (c == pivot || constraint->coeff[c] == 0.0) continue;
      const double r = constraint->coeff[c] / pivot_coeff;
      f[c] -= f[pivot] * r;
      obj[c] -= obj[pivot] * r;
    }
  }
  if (slack_block) {
    base(m, m) = constraint->constant + constraint->coeff[0] - target;
    for (std::size_t c = 1; c < classes; ++c) f[c](m, m) = constraint->coeff[c];
  }

  SdpProblem p;
  p.n = n;
  p.c = base;
  p.sense = Sense::Minimize;
  std::vector<std::size_t> vars;
  for (std::size_t c = 1; c < classes; ++c) {
    if (c == pivot && pivot != 0) continue;
    vars.push_back(c);
    p.constraints.push_back({f[c] * -1.0, obj[c]});
  }

  MomentSdpResult out;
  out.solution = solve(p, opt);
  out.moments.assign(classes, 0.0);
  out.moments[0] = 1.0;
  for (std::size_t v = 0; v < vars.size(); ++v) out.moments[vars[v]] = out.solution.y[v];
  if (pivot != 0) {
    double s = kappa;
    for (std::size_t c = 1; c < classes; ++c)
      if (c != pivot) s -= constraint->coeff[c] / pivot_coeff * out.moments[c];
    out.moments[pivot] = s;
  }
  // Primal objective: an upper bound on the maximum whenever X is feasible.
  out.value = out.solution.primal_obj + obj_const;
  return out;
}

namespace detail {
inline constexpr double kRelaxedGap = 1e-3;
inline constexpr double kRelaxedResidual = 1e-3;

inline void require_usable(const SdpSolution& s, const char* what) {
  if (s.optimal()) return;
  // At the Tsirelson bound the moment side has no strictly feasible point and
  // the interior-point iterates stall a few digits short. The best iterate is
  // still far more accurate than anything downstream needs.
  const double scale = 1.0 + std::abs(s.primal_obj);
  if (std::abs(s.gap) <= kRelaxedGap * scale && s.primal_residual <= kRelaxedResidual &&
      s.dual_residual <= kRelaxedResidual)
    return;
  throw SolverFailure(std::string(what) + ": SDP solver status " + to_string(s.status));
}
}  // namespace detail

/// Maximum of the Bell expression over the moment relaxation.
inline double tsirelson_bound(const BellExpression& e, NpaLevel level, const SdpOptions& opt = {}) {
  const MomentStructure ms(Scenario::of(e), level);
  const auto r = maximize_moments(ms, bell_form(ms, e), nullptr, 0.0, BellConstraint::Equality, opt);
  detail::require_usable(r.solution, "tsirelson_bound");
  return r.value;
}

struct RandomnessPoint {
  double param = 0.0;
  double bell_value = 0.0;
  double guessing_probability = 1.0;
  double min_entropy = 0.0;  // bits
};

inline double min_entropy_bits(double guessing_probability) {
  return guessing_probability >= 1.0 ? 0.0 : -std::log2(guessing_probability);
}

struct GuessingOptions {
  NpaLevel level = NpaLevel::Two;
  std::size_t x = 0;  // zero-based input pair
  std::size_t y = 0;
  BellConstraint constraint = BellConstraint::Equality;
  SdpOptions sdp{};
};

/// Device-independent guessing probability of the pair (a, b) for one input
/// pair, maximized over all relaxation points with the given Bell value.
class RandomnessCertifier {
 public:
  RandomnessCertifier(BellExpression e, GuessingOptions opt)
      : expr_(std::move(e)), opt_(opt), ms_(Scenario::of(expr_), opt.level), bell_(bell_form(ms_, expr_)) {
    if (opt_.x >= expr_.alice_settings() || opt_.y >= expr_.bob_settings())
      throw OutOfRange("input pair outside the scenario");
    classical_ = classical_bound(expr_);
  }

  const BellExpression& expression() const { return expr_; }
  const MomentStructure& structure() const { return ms_; }
  const GuessingOptions& options() const { return opt_; }
  double classical() const { return classical_; }

  /// Upper end of the attainable range of Bell values (cached).
  double upper_bound() const {
    if (!upper_) {
      const auto r = maximize_moments(ms_, bell_, nullptr, 0.0, BellConstraint::Equality, opt_.sdp);
      detail::require_usable(r.solution, "tsirelson_bound");
      upper_ = r.value;
    }
    return *upper_;
  }

  /// Solve for P(ab|xy) at Bell value `value` for one outcome pair.
  double guessing_probability(double value, std::size_t a, std::size_t b) const {
    const double target = clamp_value(value);
    const auto r = maximize_moments(ms_, probability_form(ms_, a, b, opt_.x, opt_.y), &bell_, target, opt_.constraint, opt_.sdp);
    detail::require_usable(r.solution, "max_guessing_probability");
    return std::clamp(r.value, 0.0, 1.0);
  }

  /// max over (a, b) of the four per-outcome SDP optima.
  double max_guessing_probability(double value) const {
    double best = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) best = std::max(best, guessing_probability(value, a, b));
    return best;
  }

  RandomnessPoint point(double value) const {
    RandomnessPoint p;
    p.bell_value = value;
    if (value <= classical_ + 1e-9) {
      p.guessing_probability = 1.0;
      p.min_entropy = 0.0;
      return p;
    }
    p.guessing_probability = max_guessing_probability(value);
    p.min_entropy = min_entropy_bits(p.guessing_probability);
    return p;
  }

 private:
  double clamp_value(double value) const {
    const double hi = upper_bound();
    if (value > hi + 1e-6) throw InfeasibleValue("Bell value exceeds the relaxation's maximum");
    if (value < classical_ - 1e-6) throw OutOfRange("Bell value below the classical bound");
    return std::min(value, hi);
  }

  BellExpression expr_;
  GuessingOptions opt_;
  MomentStructure ms_;
  MomentForm bell_;
  double classical_ = 0.0;
  mutable std::optional<double> upper_;
};

inline double max_guessing_probability(const BellExpression& e, double value, std::size_t x, std::size_t y,
                                       NpaLevel level) {
  return RandomnessCertifier(e, {level, x, y, BellConstraint::Equality, {}}).max_guessing_probability(value);
}

/// Maximal violation of `e` along a state family: closed form for the elegant
/// expression, see-saw otherwise.
inline double family_violation(StateFamily f, double param, const BellExpression& e,
                               std::uint64_t seed = kDefaultSeed) {
  return max_violation(family_state(f, param), e, seed);
}

/// Outcome of a sweep that may stop early. `points` holds the grid prefix
/// that was computed before the first failing point.
struct CurveResult {
  std::vector<RandomnessPoint> points;
  std::optional<std::string> failure;
  std::size_t failed_index = 0;

  bool complete() const { return !failure; }
};

/// Min-entropy along a one-parameter family. Grid points are independent and
/// are evaluated on `threads` workers; results come back in grid order.
/// Numerical failures are captured instead of thrown.
inline CurveResult try_min_entropy_curve(StateFamily family, std::span<const double> grid, const BellExpression& e,
                                         const GuessingOptions& opt, std::size_t threads = 1,
                                         std::uint64_t seed = kDefaultSeed) {
  const RandomnessCertifier cert(e, opt);
  CurveResult res;
  try {
    cert.upper_bound();
  } catch (const SolverFailure& err) {
    res.failure = err.what();
    return res;
  }
  std::vector<std::optional<RandomnessPoint>> pts(grid.size());
  std::vector<std::string> errors(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    try {
      const double value = family_violation(family, grid[i], e, seed);
      RandomnessPoint p = cert.point(std::min(value, cert.upper_bound()));
      p.param = grid[i];
      p.bell_value = value;
      pts[i] = p;
    } catch (const SolverFailure& err) {
      errors[i] = err.what();
    } catch (const NoConvergence& err) {
      errors[i] = err.what();
    }
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!pts[i]) {
      res.failure = errors[i];
      res.failed_index = i;
      break;
    }
    res.points.push_back(*pts[i]);
  }
  return res;
}

inline std::vector<RandomnessPoint> min_entropy_curve(StateFamily family, std::span<const double> grid,
                                                      const BellExpression& e, const GuessingOptions& opt,
                                                      std::size_t threads = 1, std::uint64_t seed = kDefaultSeed) {
  auto res = try_min_entropy_curve(family, grid, e, opt, threads, seed);
  if (res.failure) throw SolverFailure(*res.failure);
  return std::move(res.points);
}

/// Parameters where the entropy difference f - g changes sign, by linear
/// interpolation between neighbouring grid points. Points where the two curves
/// coincide (typically both zero) are skipped.
inline std::vector<double> entropy_crossings(const std::vector<RandomnessPoint>& f,
                                             const std::vector<RandomnessPoint>& g) {
  if (f.size() != g.size()) throw DimensionMismatch("curves must share a grid");
  std::vector<double> out;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i].min_entropy - g[i].min_entropy;
    if (d == 0.0) continue;
    if (prev) {
      const double dp = f[*prev].min_entropy - g[*prev].min_entropy;
      if ((dp < 0.0) != (d < 0.0)) {
        const double t = dp / (dp - d);
        out.push_back(f[*prev].param + t * (f[i].param - f[*prev].param));
      }
    }
    prev = i;
  }
  return out;
}

}  // namespace bellbound

#pragma once

// Dense semidefinite programs in standard form
//
//   minimize (or maximize)  <C, X>
//   subject to              <A_i, X> = b_i,  X >= 0,
//
// with dual  max b^T y  s.t.  C - sum_i y_i A_i = S >= 0  (minimization case).
//
// solve() is an infeasible primal-dual path-following method with Mehrotra
// predictor-corrector steps along the HKM direction. The Schur complement is
// formed densely but exploits sparsity of the constraint matrices.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellbound/linalg.hpp"

namespace bellbound {

class InvalidProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Sense { Minimize, Maximize };

struct SdpConstraint {
  RealMatrix a;
  double b = 0.0;
};

struct SdpProblem {
  std::size_t n = 0;
  RealMatrix c;
  std::vector<SdpConstraint> constraints;
  Sense sense = Sense::Minimize;

  void validate() const {
    if (c.rows() != n || c.cols() != n) throw InvalidProblem("objective matrix must be n x n");
    if (hermiticity_error(c) > 1e-12) throw InvalidProblem("objective matrix is not symmetric");
    if (constraints.size() > n * (n + 1) / 2) throw InvalidProblem("more constraints than symmetric degrees of freedom");
    for (const auto& con : constraints) {
      if (con.a.rows() != n || con.a.cols() != n) throw InvalidProblem("constraint matrix must be n x n");
      if (hermiticity_error(con.a) > 1e-12) throw InvalidProblem("constraint matrix is not symmetric");
    }
  }
};

enum class SdpStatus { Optimal, MaxIterations, NumericalFailure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::MaxIterations: return "max_iterations";
    case SdpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

/// One interior-point iterate, recorded for diagnostics.
struct SdpIterate {
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double complementarity = 0.0;  // <X, S>
  double primal_residual = 0.0;  // max |b_i - <A_i, X>|
  double dual_residual = 0.0;    // max |C - S - A^T y|
  double primal_step = 0.0;      // step lengths taken from this iterate
  double dual_step = 0.0;
};

struct SdpSolution {
  RealMatrix x;
  std::vector<double> y;
  RealMatrix s;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<SdpIterate> history;

  bool optimal() const { return status == SdpStatus::Optimal; }
};

struct SdpOptions {
  int max_iterations = 200;
  double gap_tolerance = 1e-8;       // relative
  double feasibility_tolerance = 1e-8;  // relative to 1 + data norm
  int stall_iterations = 15;
  double step_fraction = 0.98;
};

namespace detail {

struct SparseEntry {
  std::size_t row, col;
  double value;
};

struct SparseSym {
  std::vector<SparseEntry> entries;  // every nonzero of the full matrix
  std::vector<std::size_t> cols;     // distinct column indices

  explicit SparseSym(const RealMatrix& a) {
    std::vector<bool> seen(a.cols(), false);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j)
        if (a(i, j) != 0.0) {
          entries.push_back({i, j, a(i, j)});
          if (!seen[j]) {
            seen[j] = true;
            cols.push_back(j);
          }
        }
  }

  /// <A, K^T> = tr(A K).
  double trace_product(const RealMatrix& k) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * k(e.col, e.row);
    return s;
  }

  double inner(const RealMatrix& k) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * k(e.row, e.col);
    return s;
  }
};

inline RealMatrix symmetrize(const RealMatrix& a) {
  RealMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = 0.5 * (a(i, j) + a(j, i));
  return out;
}

/// L^{-1} D L^{-T} for lower-triangular L.
inline RealMatrix congruence_inverse(const RealMatrix& l, const RealMatrix& d) {
  const std::size_t n = l.rows();
  RealMatrix y(n, n);  // y = L^{-1} D
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      double s = d(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y(k, c);
      y(i, c) = s / l(i, i);
    }
  RealMatrix z(n, n);  // z = y L^{-T}, i.e. z^T = L^{-1} y^T
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < n; ++i) {
      double s = y(r, i);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * z(r, k);
      z(r, i) = s / l(i, i);
    }
  return symmetrize(z);
}

/// Largest alpha with X + alpha D still positive semidefinite (inf if unbounded).
inline double max_step(const RealMatrix& chol_x, const RealMatrix& d) {
  const double lmin = min_eigenvalue(congruence_inverse(chol_x, d), INFINITY);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

inline SdpSolution solve(const SdpProblem& problem, const SdpOptions& opt = {}) {
  problem.validate();
  const std::size_t n = problem.n;
  const std::size_t m = problem.constraints.size();
  const double sense = problem.sense == Sense::Maximize ? -1.0 : 1.0;

  RealMatrix c = problem.c * sense;
  std::vector<double> b(m);
  std::vector<detail::SparseSym> a;
  a.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = problem.constraints[i].b;
    a.emplace_back(problem.constraints[i].a);
  }

  const double cnorm = frobenius_norm(c);
  const double bnorm = detail::max_abs(b);
  const double tau = std::max({1.0, cnorm, bnorm});

  RealMatrix x = RealMatrix::identity(n) * tau;
  RealMatrix s = RealMatrix::identity(n) * tau;
  std::vector<double> y(m, 0.0);

  auto apply_a = [&](const RealMatrix& k) {
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = a[i].inner(k);
    return out;
  };
  auto apply_at = [&](std::span<const double> v) {
    RealMatrix out(n, n);
    for (std::size_t i = 0; i < m; ++i)
      if (v[i] != 0.0)
        for (const auto& e : a[i].entries) out(e.row, e.col) += v[i] * e.value;
    return out;
  };

  SdpSolution sol;
  RealMatrix best_x = x, best_s = s;
  std::vector<double> best_y = y;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iter = 0;

  // Accepted accuracy for a non-converged exit.
  auto acceptable = [&](double pobj, double dobj, double pres, double dres) {
    return std::abs(pobj - dobj) <= 1e-7 * (1.0 + std::abs(pobj)) && pres <= 1e-8 * (1.0 + bnorm) &&
           dres <= 1e-8 * (1.0 + cnorm);
  };

  auto finish = [&](SdpStatus status, int iters) {
    if (status != SdpStatus::Optimal && std::isfinite(best_merit)) {
      x = best_x;
      y = best_y;
      s = best_s;
    }
    sol.x = x;
    sol.s = s;
    sol.iterations = iters;
    sol.status = status;
    const double pobj = frobenius_dot(c, x);
    double dobj = 0.0;
    for (std::size_t i = 0; i < m; ++i) dobj += b[i] * y[i];
    std::vector<double> rp = apply_a(x);
    for (std::size_t i = 0; i < m; ++i) rp[i] = b[i] - rp[i];
    RealMatrix rd = c - s - apply_at(y);
    sol.primal_residual = detail::max_abs(rp);
    sol.dual_residual = detail::max_abs(rd.data());
    sol.primal_obj = sense * pobj;
    sol.dual_obj = sense * dobj;
    sol.gap = sol.primal_obj - sol.dual_obj;
    if (status != SdpStatus::Optimal && acceptable(pobj, dobj, sol.primal_residual, sol.dual_residual))
      sol.status = SdpStatus::Optimal;
    sol.y = y;
    if (sense < 0)
      for (double& v : sol.y) v = -v;
    return sol;
  };

  const double eps = opt.gap_tolerance;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    std::vector<double> rp = apply_a(x);
    for (std::size_t i = 0; i < m; ++i) rp[i] = b[i] - rp[i];
    const RealMatrix rd = c - s - apply_at(y);
    const double pobj = frobenius_dot(c, x);
    double dobj = 0.0;
    for (std::size_t i = 0; i < m; ++i) dobj += b[i] * y[i];
    const double xs = frobenius_dot(x, s);
    const double mu = xs / static_cast<double>(n);

    SdpIterate it{sense * pobj, sense * dobj, xs, detail::max_abs(rp), detail::max_abs(rd.data())};
    sol.history.push_back(it);

    const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const bool pfeas = it.primal_residual <= opt.feasibility_tolerance * (1.0 + bnorm);
    const bool dfeas = it.dual_residual <= opt.feasibility_tolerance * (1.0 + cnorm);
    if (rel_gap <= eps && xs / (1.0 + std::abs(pobj)) <= 10 * eps && pfeas && dfeas)
      return finish(SdpStatus::Optimal, iter);

    const double merit = std::max({rel_gap, it.primal_residual / (1.0 + bnorm), it.dual_residual / (1.0 + cnorm)});
    if (merit < 0.9 * best_merit || !std::isfinite(best_merit)) {
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_s = s;
      best_iter = iter;
    } else if (iter - best_iter >= opt.stall_iterations) {
      return finish(SdpStatus::NumericalFailure, iter);
    }

    RealMatrix lx, ls;
    try {
      lx = cholesky(x, 0.0);
      ls = cholesky(s, 0.0);
    } catch (const NotPositiveDefinite&) {
      return finish(SdpStatus::NumericalFailure, iter);
    }
    const RealMatrix sinv = cholesky_inverse(ls);

    // Schur complement M_ij = tr(A_i X A_j S^{-1}).
    RealMatrix schur(m, m);
    {
      RealMatrix g(n, n);
      std::vector<double> xa(n * n);
      for (std::size_t j = 0; j < m; ++j) {
        const auto& aj = a[j];
        // xa[:, s] = (X A_j)[:, s] for s in the column support of A_j.
        for (std::size_t col : aj.cols)
          for (std::size_t q = 0; q < n; ++q) xa[q * n + col] = 0.0;
        for (const auto& e : aj.entries)
          for (std::size_t q = 0; q < n; ++q) xa[q * n + e.col] += x(q, e.row) * e.value;
        for (std::size_t q = 0; q < n; ++q)
          for (std::size_t p = 0; p < n; ++p) {
            double acc = 0.0;
            for (std::size_t col : aj.cols) acc += xa[q * n + col] * sinv(col, p);
            g(q, p) = acc;
          }
        for (std::size_t i = j; i < m; ++i) {
          const double v = a[i].trace_product(g);
          schur(i, j) = v;
          schur(j, i) = v;
        }
      }
    }
    RealMatrix lschur;
    {
      double shift = 0.0;
      double diag_max = 0.0;
      for (std::size_t i = 0; i < m; ++i) diag_max = std::max(diag_max, schur(i, i));
      for (int attempt = 0;; ++attempt) {
        try {
          RealMatrix reg = schur;
          for (std::size_t i = 0; i < m; ++i) reg(i, i) += shift;
          lschur = cholesky(reg, 0.0);
          break;
        } catch (const NotPositiveDefinite&) {
          if (attempt >= 6) return finish(SdpStatus::NumericalFailure, iter);
          shift = shift == 0.0 ? 1e-14 * std::max(1.0, diag_max) : shift * 100.0;
        }
      }
    }

    const RealMatrix xrd = x * rd;
    auto direction = [&](const RealMatrix& rc, RealMatrix& dx, std::vector<double>& dy, RealMatrix& ds) {
      const RealMatrix k = (rc - xrd) * sinv;
      std::vector<double> rhs(m);
      for (std::size_t i = 0; i < m; ++i) rhs[i] = rp[i] - a[i].trace_product(k);
      dy = cholesky_solve(lschur, rhs);
      // Refine against the unformed operator; the explicit Schur matrix loses
      // accuracy as X and S approach complementary low-rank faces.
      for (int pass = 0;; ++pass) {
        ds = rd - apply_at(dy);
        dx = detail::symmetrize((rc - x * ds) * sinv);
        if (pass == 2) break;
        const std::vector<double> adx = apply_a(dx);
        std::vector<double> err(m);
        for (std::size_t i = 0; i < m; ++i) err[i] = rp[i] - adx[i];
        if (detail::max_abs(err) <= 1e-15 * (1.0 + detail::max_abs(rp))) break;
        const std::vector<double> corr = cholesky_solve(lschur, err);
        for (std::size_t i = 0; i < m; ++i) dy[i] += corr[i];
      }
    };

    auto step_lengths = [&](const RealMatrix& dx, const RealMatrix& ds, double frac) {
      const double ap = std::min(1.0, frac * detail::max_step(lx, dx));
      const double ad = std::min(1.0, frac * detail::max_step(ls, ds));
      return std::pair{ap, ad};
    };

    // Predictor.
    const RealMatrix xs_mat = x * s;
    RealMatrix dx, ds;
    std::vector<double> dy;
    RealMatrix rc = xs_mat * -1.0;
    direction(rc, dx, dy, ds);
    auto [ap_aff, ad_aff] = step_lengths(dx, ds, 1.0);
    const double mu_aff =
        frobenius_dot(x + dx * ap_aff, s + ds * ad_aff) / static_cast<double>(n);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector.
    rc = RealMatrix::identity(n) * (sigma * mu) - xs_mat - dx * ds;
    direction(rc, dx, dy, ds);
    auto [ap, ad] = step_lengths(dx, ds, opt.step_fraction);

    sol.history.back().primal_step = ap;
    sol.history.back().dual_step = ad;
    x += dx * ap;
    s += ds * ad;
    for (std::size_t i = 0; i < m; ++i) y[i] += ad * dy[i];
    x = detail::symmetrize(x);
    s = detail::symmetrize(s);
    if (!std::isfinite(frobenius_norm(x)) || !std::isfinite(frobenius_norm(s)))
      return finish(SdpStatus::NumericalFailure, iter + 1);
  }
  return finish(SdpStatus::MaxIterations, opt.max_iterations);
}

// ---------------------------------------------------------------------------
// Gram-matrix problem: minimize the sum of pairwise inner products of four
// unit vectors, written as min 1/2 tr(M W) s.t. M >= 0, m_ii = 1.

inline RealMatrix all_ones_off_diagonal(std::size_t n) {
  RealMatrix w(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) w(i, i) = 0.0;
  return w;
}

inline SdpProblem gram_problem() {
  SdpProblem p;
  p.n = 4;
  p.c = all_ones_off_diagonal(4) * 0.5;
  for (std::size_t i = 0; i < 4; ++i) {
    RealMatrix e(4, 4);
    e(i, i) = 1.0;
    p.constraints.push_back({std::move(e), 1.0});
  }
  p.sense = Sense::Minimize;
  return p;
}

struct CertificateCheck {
  double min_eigenvalue = 0.0;
  bool feasible = false;
};

/// Dual feasibility of v for the Gram problem: 1/2 W - diag(v) >= 0.
inline CertificateCheck dual_certificate_check(const std::array<double, 4>& v) {
  RealMatrix m = all_ones_off_diagonal(4) * 0.5;
  for (std::size_t i = 0; i < 4; ++i) m(i, i) -= v[i];
  CertificateCheck out;
  out.min_eigenvalue = min_eigenvalue(m);
  out.feasible = out.min_eigenvalue >= -1e-9;
  return out;
}

}  // namespace bellbound

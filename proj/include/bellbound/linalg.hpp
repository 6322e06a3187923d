#pragma once

// Dense linear algebra for small problems: a row-major matrix template,
// Hermitian eigendecomposition, 3x3 SVD, Kronecker products and Cholesky.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace bellbound {

using cplx = std::complex<double>;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kReconstruction = 1e-10;
inline constexpr double kCholeskyPivot = 1e-13;
inline constexpr double kSvdOffDiagonal = 1e-14;
inline constexpr int kSvdMaxSweeps = 60;
inline constexpr int kQlMaxIterations = 60;
}  // namespace tol

class NonHermitianInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double conj(double x) { return x; }
inline cplx conj(const cplx& x) { return std::conj(x); }
inline double real(double x) { return x; }
inline double real(const cplx& x) { return x.real(); }
}  // namespace detail

template <typename Scalar>
class Matrix {
 public:
  using value_type = Scalar;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Scalar fill = Scalar{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionMismatch("matrix data length does not match shape");
    }
  }
  Matrix(std::initializer_list<std::initializer_list<Scalar>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionMismatch("ragged initializer list");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar{1};
    return m;
  }

  static Matrix diagonal(std::span<const Scalar> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Scalar& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Scalar& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<Scalar> data() { return data_; }
  std::span<const Scalar> data() const { return data_; }

  Matrix adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = detail::conj((*this)(i, j));
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  Scalar trace() const {
    Scalar t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(Scalar s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, Scalar s) { return a *= s; }
  friend Matrix operator*(Scalar s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Scalar aik = a(i, k);
        if (aik == Scalar{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;

template <typename Scalar>
double max_abs_diff(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

template <typename Scalar>
double hermiticity_error(const Matrix<Scalar>& m) {
  if (!m.square()) return INFINITY;
  double err = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) err = std::max(err, std::abs(m(i, j) - detail::conj(m(j, i))));
  return err;
}

/// Frobenius inner product tr(A^T B) for real matrices.
inline double frobenius_dot(const RealMatrix& a, const RealMatrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) s += a.data()[k] * b.data()[k];
  return s;
}

inline double frobenius_norm(const RealMatrix& a) { return std::sqrt(frobenius_dot(a, a)); }

/// (i*p + k, j*q + l) entry is a(i, j) * b(k, l).
template <typename Scalar>
Matrix<Scalar> kron(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  const std::size_t p = b.rows(), q = b.cols();
  Matrix<Scalar> out(a.rows() * p, a.cols() * q);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t l = 0; l < q; ++l) out(i * p + k, j * q + l) = a(i, j) * b(k, l);
  return out;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver

template <typename Scalar>
struct EigenResult {
  std::vector<double> values;      // ascending
  Matrix<Scalar> vectors;          // column i pairs with values[i]
};

namespace detail {

// Implicit QL on a real symmetric tridiagonal matrix (diagonal d, subdiagonal
// e with e[i] coupling i and i+1). z accumulates rotations; on return d is
// sorted ascending and the columns of z are permuted to match.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double> e, RealMatrix& z) {
  const std::size_t n = d.size();
  if (n == 0) return;
  e.resize(n, 0.0);
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > tol::kQlMaxIterations) throw NoConvergence("tridiagonal QL did not converge");
        // Wilkinson-type shift from the leading 2x2 block.
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          const std::size_t i = ii;
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < z.rows(); ++k) {
            h = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * h;
            z(k, i) = c * z(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  // Selection sort keeps columns aligned with eigenvalues.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t k = i;
    for (std::size_t j = i + 1; j < n; ++j)
      if (d[j] < d[k]) k = j;
    if (k != i) {
      std::swap(d[i], d[k]);
      for (std::size_t r = 0; r < z.rows(); ++r) std::swap(z(r, i), z(r, k));
    }
  }
}

}  // namespace detail

/// Eigendecomposition of a Hermitian (or real symmetric) matrix by Householder
/// tridiagonalization followed by implicit QL. Eigenvalues ascending.
template <typename Scalar>
EigenResult<Scalar> hermitian_eig(const Matrix<Scalar>& m, double herm_tol = tol::kHermitian) {
  if (!m.square()) throw DimensionMismatch("hermitian_eig requires a square matrix");
  if (hermiticity_error(m) > herm_tol) throw NonHermitianInput("matrix is not Hermitian within tolerance");
  const std::size_t n = m.rows();
  Matrix<Scalar> a = m;
  Matrix<Scalar> q = Matrix<Scalar>::identity(n);

  std::vector<Scalar> v(n);
  std::vector<Scalar> w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm2 += std::norm(a(i, k));
    const double tail = xnorm2 - std::norm(a(k + 1, k));
    if (tail <= 0.0) continue;
    const double xnorm = std::sqrt(xnorm2);
    const Scalar x0 = a(k + 1, k);
    Scalar phase{1};
    if (std::abs(x0) > 0.0) phase = x0 / std::abs(x0);
    const Scalar alpha = -phase * xnorm;

    std::fill(v.begin(), v.end(), Scalar{});
    v[k + 1] = x0 - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
    if (vnorm2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(vnorm2);
    for (std::size_t i = k + 1; i < n; ++i) v[i] *= inv;

    // A <- H A H with H = I - 2 v v^*.
    // First A <- A - 2 (A v) v^*.
    for (std::size_t i = 0; i < n; ++i) {
      Scalar s{};
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      w[i] = s;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= 2.0 * w[i] * detail::conj(v[j]);
    // Then A <- A - 2 v (v^* A).
    for (std::size_t j = 0; j < n; ++j) {
      Scalar s{};
      for (std::size_t i = k + 1; i < n; ++i) s += detail::conj(v[i]) * a(i, j);
      w[j] = s;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= 2.0 * v[i] * w[j];
    // Q <- Q H.
    for (std::size_t i = 0; i < n; ++i) {
      Scalar s{};
      for (std::size_t j = k + 1; j < n; ++j) s += q(i, j) * v[j];
      for (std::size_t j = k + 1; j < n; ++j) q(i, j) -= 2.0 * s * detail::conj(v[j]);
    }
  }

  // Tridiagonal with possibly complex off-diagonals; a diagonal unitary makes
  // them real and nonnegative.
  std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
  std::vector<Scalar> phase(n, Scalar{1});
  for (std::size_t i = 0; i < n; ++i) d[i] = detail::real(a(i, i));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Scalar sub = a(i + 1, i);
    const double mag = std::abs(sub);
    e[i] = mag;
    phase[i + 1] = mag > 0.0 ? phase[i] * (sub / mag) : phase[i];
  }

  RealMatrix z = RealMatrix::identity(n);
  detail::tridiagonal_ql(d, e, z);

  EigenResult<Scalar> out;
  out.values = std::move(d);
  out.vectors = Matrix<Scalar>(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < n; ++c) {
      Scalar s{};
      for (std::size_t j = 0; j < n; ++j) s += q(i, j) * phase[j] * z(j, c);
      out.vectors(i, c) = s;
    }
  return out;
}

template <typename Scalar>
double min_eigenvalue(const Matrix<Scalar>& m, double herm_tol = tol::kHermitian) {
  return hermitian_eig(m, herm_tol).values.front();
}

// ---------------------------------------------------------------------------
// 3x3 real matrices and SVD

using Vec3 = std::array<double, 3>;

struct RealMatrix3 {
  std::array<double, 9> m{};  // row-major

  static RealMatrix3 identity() { return diag(1.0, 1.0, 1.0); }
  static RealMatrix3 diag(double a, double b, double c) {
    RealMatrix3 r;
    r.m = {a, 0, 0, 0, b, 0, 0, 0, c};
    return r;
  }

  double& operator()(std::size_t i, std::size_t j) { return m[i * 3 + j]; }
  double operator()(std::size_t i, std::size_t j) const { return m[i * 3 + j]; }

  bool finite() const {
    return std::all_of(m.begin(), m.end(), [](double x) { return std::isfinite(x); });
  }

  RealMatrix3 transpose() const {
    RealMatrix3 t;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Vec3 apply(const Vec3& v) const {
    Vec3 r{};
    for (std::size_t i = 0; i < 3; ++i) r[i] = m[i * 3] * v[0] + m[i * 3 + 1] * v[1] + m[i * 3 + 2] * v[2];
    return r;
  }

  friend RealMatrix3 operator*(const RealMatrix3& a, const RealMatrix3& b) {
    RealMatrix3 r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) r(i, j) += a(i, k) * b(k, j);
    return r;
  }

  friend bool operator==(const RealMatrix3&, const RealMatrix3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

inline double max_abs_diff(const RealMatrix3& a, const RealMatrix3& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < 9; ++k) e = std::max(e, std::abs(a.m[k] - b.m[k]));
  return e;
}

struct SvdResult3 {
  Vec3 singular_values{};            // descending
  std::array<Vec3, 3> left_vectors{};   // u_k, column k of U
  std::array<Vec3, 3> right_vectors{};  // v_k, column k of V

  RealMatrix3 u() const { return columns(left_vectors); }
  RealMatrix3 v() const { return columns(right_vectors); }

  RealMatrix3 reconstruct() const {
    RealMatrix3 r;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          r(i, j) += singular_values[k] * left_vectors[k][i] * right_vectors[k][j];
    return r;
  }

 private:
  static RealMatrix3 columns(const std::array<Vec3, 3>& cols) {
    RealMatrix3 r;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < 3; ++i) r(i, k) = cols[k][i];
    return r;
  }
};

namespace detail {
// Unit vector orthogonal to every vector in `basis` (which are orthonormal).
inline Vec3 complete_basis(std::span<const Vec3> basis) {
  if (basis.size() == 2) return cross(basis[0], basis[1]);
  const std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  if (basis.empty()) return axes[0];
  // Pick the axis least aligned with basis[0] and orthogonalize.
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (std::abs(basis[0][k]) < std::abs(basis[0][best])) best = k;
  Vec3 w = axes[best] - scaled(basis[0], basis[0][best]);
  return scaled(w, 1.0 / norm(w));
}
}  // namespace detail

/// SVD of a 3x3 real matrix by one-sided (Hestenes) Jacobi rotations, which
/// diagonalize T^T T implicitly while acting on the columns of T.
inline SvdResult3 svd3(const RealMatrix3& t) {
  if (!t.finite()) throw std::invalid_argument("svd3: non-finite entry");
  std::array<Vec3, 3> col{};  // columns of T V
  std::array<Vec3, 3> vcol{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) col[j][i] = t(i, j);

  for (int sweep = 0; sweep < tol::kSvdMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < 2; ++p)
      for (std::size_t q = p + 1; q < 3; ++q) {
        const double alpha = dot(col[p], col[p]);
        const double beta = dot(col[q], col[q]);
        const double gamma = dot(col[p], col[q]);
        if (alpha == 0.0 || beta == 0.0) continue;
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        off = std::max(off, rel);
        if (rel < tol::kSvdOffDiagonal) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double tn = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, tn);
        const double s = c * tn;
        for (std::size_t i = 0; i < 3; ++i) {
          const double x = col[p][i], y = col[q][i];
          col[p][i] = c * x - s * y;
          col[q][i] = s * x + c * y;
          const double vx = vcol[p][i], vy = vcol[q][i];
          vcol[p][i] = c * vx - s * vy;
          vcol[q][i] = s * vx + c * vy;
        }
      }
    if (off < tol::kSvdOffDiagonal) break;
  }

  std::array<std::size_t, 3> order{0, 1, 2};
  Vec3 sv{norm(col[0]), norm(col[1]), norm(col[2])};
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sv[a] > sv[b]; });

  SvdResult3 out;
  const double smax = sv[order[0]];
  std::vector<Vec3> lefts;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t j = order[k];
    Vec3 v = vcol[j];
    Vec3 c = col[j];
    // First nonzero component of each right vector is made nonnegative.
    for (double comp : v) {
      if (std::abs(comp) > 1e-15) {
        if (comp < 0) {
          v = scaled(v, -1.0);
          c = scaled(c, -1.0);
        }
        break;
      }
    }
    out.right_vectors[k] = v;
    const bool zero = sv[j] == 0.0 || sv[j] <= tol::kSvdOffDiagonal * smax;
    out.singular_values[k] = zero ? 0.0 : sv[j];
    if (!zero) {
      out.left_vectors[k] = scaled(c, 1.0 / sv[j]);
      lefts.push_back(out.left_vectors[k]);
    }
  }
  for (std::size_t k = lefts.size(); k < 3; ++k) {
    out.left_vectors[k] = detail::complete_basis(lefts);
    lefts.push_back(out.left_vectors[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cholesky

/// In-place lower Cholesky factor of a symmetric positive-definite matrix.
inline RealMatrix cholesky(const RealMatrix& a, double pivot_tol = tol::kCholeskyPivot) {
  if (!a.square()) throw DimensionMismatch("cholesky requires a square matrix");
  const std::size_t n = a.rows();
  RealMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_tol)) throw NotPositiveDefinite("cholesky pivot " + std::to_string(j) + " not positive");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

inline std::vector<double> cholesky_solve(const RealMatrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw DimensionMismatch("cholesky_solve rhs length");
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

inline std::vector<double> solve_spd(const RealMatrix& a, std::span<const double> b) {
  if (hermiticity_error(a) > 1e-12 * (1.0 + frobenius_norm(a)))
    throw NonHermitianInput("solve_spd requires a symmetric matrix");
  return cholesky_solve(cholesky(a), b);
}

/// Inverse of an SPD matrix from its Cholesky factor.
inline RealMatrix cholesky_inverse(const RealMatrix& l) {
  const std::size_t n = l.rows();
  RealMatrix linv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    linv(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l(i, k) * linv(k, j);
      linv(i, j) = s / l(i, i);
    }
  }
  RealMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += linv(k, i) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

}  // namespace bellbound

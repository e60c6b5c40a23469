#include "softsensor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "softsensor/error.hpp"

namespace softsensor {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw validation_error("DenseMatrix: entry count " +
                           std::to_string(data_.size()) + " != rows*cols " +
                           std::to_string(rows * cols));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  DenseMatrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) {
      throw validation_error("DenseMatrix::from_rows: ragged row " +
                             std::to_string(r));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Vector DenseMatrix::column(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void DenseMatrix::check_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw validation_error("DenseMatrix: non-finite entry at (" +
                             std::to_string(i / cols_) + ", " +
                             std::to_string(i % cols_) + ")");
    }
  }
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw validation_error("matrix product: shape mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Vector operator*(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw validation_error("matrix-vector: shape mismatch");
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

Vector transpose_times(const DenseMatrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw validation_error("Aᵀx: shape mismatch");
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += row[j] * xi;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const DenseMatrix& a) { return norm_inf(a.entries()); }

// ---------------------------------------------------------------------------
// Householder QR

HouseholderQr::HouseholderQr(const DenseMatrix& a)
    : qr_(a), beta_(a.cols(), 0.0), rdiag_(a.cols(), 0.0) {
  const std::size_t m = qr_.rows();
  const std::size_t k = qr_.cols();
  if (m < k) throw validation_error("QR: needs rows >= cols");
  for (std::size_t j = 0; j < k; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < m; ++i) norm += qr_(i, j) * qr_(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      beta_[j] = 0.0;
      rdiag_[j] = 0.0;
      continue;
    }
    const double x0 = qr_(j, j);
    const double alpha = x0 > 0 ? -norm : norm;
    const double v0 = x0 - alpha;
    // Scale so v(0) == 1; the tail lives below the diagonal.
    for (std::size_t i = j + 1; i < m; ++i) qr_(i, j) /= v0;
    double vtv = 1.0;
    for (std::size_t i = j + 1; i < m; ++i) vtv += qr_(i, j) * qr_(i, j);
    beta_[j] = 2.0 / vtv;
    rdiag_[j] = alpha;
    qr_(j, j) = alpha;
    for (std::size_t c = j + 1; c < k; ++c) {
      double s = qr_(j, c);
      for (std::size_t i = j + 1; i < m; ++i) s += qr_(i, j) * qr_(i, c);
      s *= beta_[j];
      qr_(j, c) -= s;
      for (std::size_t i = j + 1; i < m; ++i) qr_(i, c) -= s * qr_(i, j);
    }
  }
}

Vector HouseholderQr::r_diagonal() const { return rdiag_; }

DenseMatrix HouseholderQr::r() const {
  const std::size_t k = cols();
  DenseMatrix r(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    r(i, i) = rdiag_[i];
    for (std::size_t j = i + 1; j < k; ++j) r(i, j) = qr_(i, j);
  }
  return r;
}

void HouseholderQr::apply_qt(std::span<double> v) const {
  const std::size_t m = rows();
  for (std::size_t j = 0; j < cols(); ++j) {
    if (beta_[j] == 0.0) continue;
    double s = v[j];
    for (std::size_t i = j + 1; i < m; ++i) s += qr_(i, j) * v[i];
    s *= beta_[j];
    v[j] -= s;
    for (std::size_t i = j + 1; i < m; ++i) v[i] -= s * qr_(i, j);
  }
}

DenseMatrix HouseholderQr::thin_q() const {
  const std::size_t m = rows();
  const std::size_t k = cols();
  DenseMatrix q(m, k);
  // Q = H_0 H_1 ... H_{k-1}; apply the reflectors in reverse to e_c.
  for (std::size_t c = 0; c < k; ++c) {
    Vector e(m, 0.0);
    e[c] = 1.0;
    for (std::size_t jj = k; jj-- > 0;) {
      if (beta_[jj] == 0.0) continue;
      double s = e[jj];
      for (std::size_t i = jj + 1; i < m; ++i) s += qr_(i, jj) * e[i];
      s *= beta_[jj];
      e[jj] -= s;
      for (std::size_t i = jj + 1; i < m; ++i) e[i] -= s * qr_(i, jj);
    }
    for (std::size_t i = 0; i < m; ++i) q(i, c) = e[i];
  }
  return q;
}

Vector HouseholderQr::solve(std::span<const double> b) const {
  const std::size_t m = rows();
  const std::size_t k = cols();
  if (b.size() != m) throw validation_error("least squares: rhs length mismatch");
  double largest = 0.0;
  for (double d : rdiag_) largest = std::max(largest, std::abs(d));
  for (std::size_t j = 0; j < k; ++j) {
    if (std::abs(rdiag_[j]) < 1e-10 * largest || largest == 0.0) {
      throw validation_error("least squares: rank-deficient design, column " +
                             std::to_string(j) + " is (nearly) dependent");
    }
  }
  Vector qtb(b.begin(), b.end());
  apply_qt(qtb);
  Vector x(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double s = qtb[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= qr_(i, j) * x[j];
    x[i] = s / rdiag_[i];
  }
  return x;
}

Vector least_squares(const DenseMatrix& a, std::span<const double> b) {
  if (a.rows() < a.cols()) {
    throw validation_error("least squares: " + std::to_string(a.rows()) +
                           " rows cannot determine " + std::to_string(a.cols()) +
                           " unknowns");
  }
  a.check_finite();
  return HouseholderQr(a).solve(b);
}

// ---------------------------------------------------------------------------
// Cholesky

Cholesky::Cholesky(const DenseMatrix& s) : l_(s.rows(), s.cols()) {
  const std::size_t n = s.rows();
  if (s.cols() != n) throw validation_error("Cholesky: matrix not square");
  const double scale = std::max(1.0, max_abs(s));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-10 * scale)
        throw validation_error("Cholesky: matrix not symmetric at (" +
                               std::to_string(i) + ", " + std::to_string(j) + ")");
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (!(d > 0.0)) {
      throw solver_error("Cholesky: non-positive pivot " + std::to_string(d) +
                         " at index " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    l_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l_(i, k) * l_(j, k);
      l_(i, j) = v / ljj;
    }
  }
}

Vector Cholesky::solve(std::span<const double> r) const {
  const std::size_t n = l_.rows();
  if (r.size() != n) throw validation_error("Cholesky: rhs length mismatch");
  Vector y(r.begin(), r.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l_(i, k) * y[k];
    y[i] /= l_(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= l_(k, i) * y[k];
    y[i] /= l_(i, i);
  }
  return y;
}

Vector cholesky_solve(const DenseMatrix& s, std::span<const double> r) {
  return Cholesky(s).solve(r);
}

// ---------------------------------------------------------------------------
// LU

PivotedLu::PivotedLu(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
  const std::size_t n = lu_.rows();
  if (lu_.cols() != n) throw validation_error("LU: matrix not square");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double scale = std::max(1e-300, max_abs(lu_));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (best <= 1e-14 * scale) {
      singular_ = true;
      return;
    }
    if (p != k) {
      std::swap(perm_[p], perm_[k]);
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(p, j), lu_(k, j));
    }
    const double pivot = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / pivot;
      lu_(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

Vector PivotedLu::solve(std::span<const double> b) const {
  if (singular_) throw solver_error("LU: singular matrix");
  const std::size_t n = lu_.rows();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) x[i] -= lu_(i, k) * x[k];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) x[i] -= lu_(i, k) * x[k];
    x[i] /= lu_(i, i);
  }
  return x;
}

bool invert(DenseMatrix& a, double pivot_tol) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw validation_error("invert: matrix not square");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const double scale = std::max(1e-300, max_abs(a));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    if (best <= pivot_tol * scale) return false;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(k, j));
      std::swap(perm[p], perm[k]);
    }
    const double inv = 1.0 / a(k, k);
    a(k, k) = 1.0;
    for (std::size_t j = 0; j < n; ++j) a(k, j) *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a(i, k);
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  // Row swaps on the input become column swaps on the inverse.
  DenseMatrix out(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) out(i, perm[j]) = a(i, j);
  a = std::move(out);
  return true;
}

}  // namespace softsensor

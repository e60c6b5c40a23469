#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace softsensor {

using Vector = std::vector<double>;

/// Row-major dense matrix. All instances in this project are small, so no
/// sparse storage is attempted here.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  Vector column(std::size_t c) const;
  DenseMatrix transposed() const;
  const std::vector<double>& entries() const noexcept { return data_; }
  bool operator==(const DenseMatrix&) const = default;

  /// Throws if any entry is NaN or infinite.
  void check_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, std::span<const double> x);
/// Computes Aᵀx without forming the transpose.
Vector transpose_times(const DenseMatrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
double max_abs(const DenseMatrix& a);

/// Householder QR of an m×k matrix with m ≥ k. Q is kept in factored form.
class HouseholderQr {
 public:
  explicit HouseholderQr(const DenseMatrix& a);

  std::size_t rows() const noexcept { return qr_.rows(); }
  std::size_t cols() const noexcept { return qr_.cols(); }

  /// Diagonal of R, in column order.
  Vector r_diagonal() const;
  /// Upper-triangular k×k factor.
  DenseMatrix r() const;
  /// Thin orthonormal factor (m×k), formed explicitly.
  DenseMatrix thin_q() const;

  /// Applies Qᵀ to an m-vector in place.
  void apply_qt(std::span<double> v) const;
  /// Solves the least-squares problem; throws on rank deficiency.
  Vector solve(std::span<const double> b) const;

 private:
  DenseMatrix qr_;  // R above the diagonal, Householder vectors below
  Vector beta_;
  Vector rdiag_;
};

/// argmin ‖Ax − b‖₂ via Householder QR. Throws when the smallest |R_ii| is
/// below 1e-10 times the largest, naming the offending column.
Vector least_squares(const DenseMatrix& a, std::span<const double> b);

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class Cholesky {
 public:
  explicit Cholesky(const DenseMatrix& s);
  Vector solve(std::span<const double> r) const;
  const DenseMatrix& factor() const noexcept { return l_; }

 private:
  DenseMatrix l_;
};

Vector cholesky_solve(const DenseMatrix& s, std::span<const double> r);

/// LU with partial pivoting for general square systems (KKT matrices).
class PivotedLu {
 public:
  explicit PivotedLu(DenseMatrix a);
  bool singular() const noexcept { return singular_; }
  Vector solve(std::span<const double> b) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = false;
};

/// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
/// Returns false when a pivot falls below `pivot_tol` times the column scale.
bool invert(DenseMatrix& a, double pivot_tol = 1e-11);

}  // namespace softsensor

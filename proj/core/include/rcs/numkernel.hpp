#pragma once

// Dense real linear algebra used throughout the library. Row-major storage,
// IEEE double precision, no external numeric dependency.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace rcs {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  /// rows and cols must both be >= 1.
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Vector column(std::size_t c) const;
  Matrix transposed() const;
  /// Submatrix made of the listed columns, in order.
  Matrix select_columns(std::span<const std::size_t> cols) const;

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Counts scalar multiply-adds performed by the kernels on the calling thread.
/// Used to assert per-step cost contracts.
struct OpCounter {
  static std::uint64_t value() noexcept;
  static void reset() noexcept;
  static void add(std::uint64_t n) noexcept;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Ax. Throws DimensionError if A.cols() != x.size().
Vector matvec(const Matrix& A, std::span<const double> x);
void matvec_into(const Matrix& A, std::span<const double> x, std::span<double> out);
/// A^T r.
Vector matvec_transposed(const Matrix& A, std::span<const double> r);
void matvec_transposed_into(const Matrix& A, std::span<const double> r, std::span<double> out);
Matrix matmul(const Matrix& A, const Matrix& B);

/// Least-squares minimizer of ||A_S c - y||_2 through a Cholesky factorization
/// of the Gram matrix. Throws SingularSystemError when a pivot falls below
/// 1e-12 * max|G_ij|, and DimensionError on shape mismatch.
Vector gram_solve(const Matrix& A_S, std::span<const double> y);

/// Power-iteration estimate of lambda_max(A^T A). The estimate is a Rayleigh
/// quotient, so it approaches the true value from below.
double spectral_norm_sq(const Matrix& A, std::size_t iters = 100, std::uint64_t seed = 0);

}  // namespace rcs

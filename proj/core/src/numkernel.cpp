#include "rcs/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rcs/errors.hpp"
#include "rcs/random.hpp"

namespace rcs {

namespace {

thread_local std::uint64_t g_ops = 0;

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

std::uint64_t OpCounter::value() noexcept { return g_ops; }
void OpCounter::reset() noexcept { g_ops = 0; }
void OpCounter::add(std::uint64_t n) noexcept { g_ops += n; }

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw DimensionError("Matrix: rows and cols must be >= 1");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix I(n, n);
  for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix D(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) D(i, i) = d[i];
  return D;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Matrix M(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Matrix::from_rows: ragged rows");
    std::copy(row.begin(), row.end(), M.row(i++).begin());
  }
  return M;
}

Vector Matrix::column(std::size_t c) const {
  if (c >= cols_) throw BoundsError("Matrix::column: index out of range");
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix T(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) T(c, r) = (*this)(r, c);
  return T;
}

Matrix Matrix::select_columns(std::span<const std::size_t> cols) const {
  if (cols.empty()) throw DimensionError("Matrix::select_columns: empty selection");
  Matrix S(rows_, cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] >= cols_) throw BoundsError("Matrix::select_columns: index out of range");
    for (std::size_t r = 0; r < rows_; ++r) S(r, k) = (*this)(r, cols[k]);
  }
  return S;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  OpCounter::add(a.size());
  return s;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
  OpCounter::add(x.size());
}

void matvec_into(const Matrix& A, std::span<const double> x, std::span<double> out) {
  require(A.cols() == x.size(), "matvec: A.cols() != x.size()");
  require(A.rows() == out.size(), "matvec: output length != A.rows()");
  for (std::size_t r = 0; r < A.rows(); ++r) {
    const auto row = A.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
    out[r] = s;
  }
  OpCounter::add(A.rows() * A.cols());
}

Vector matvec(const Matrix& A, std::span<const double> x) {
  Vector out(A.rows());
  matvec_into(A, x, out);
  return out;
}

void matvec_transposed_into(const Matrix& A, std::span<const double> r, std::span<double> out) {
  require(A.rows() == r.size(), "matvec_transposed: A.rows() != r.size()");
  require(A.cols() == out.size(), "matvec_transposed: output length != A.cols()");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double ri = r[i];
    if (ri == 0.0) continue;
    const auto row = A.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += ri * row[c];
  }
  OpCounter::add(A.rows() * A.cols());
}

Vector matvec_transposed(const Matrix& A, std::span<const double> r) {
  Vector out(A.cols());
  matvec_transposed_into(A, r, out);
  return out;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  require(A.cols() == B.rows(), "matmul: inner dimensions differ");
  Matrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    auto crow = C.row(i);
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      const auto brow = B.row(k);
      for (std::size_t j = 0; j < B.cols(); ++j) crow[j] += a * brow[j];
    }
  }
  OpCounter::add(A.rows() * A.cols() * B.cols());
  return C;
}

Vector gram_solve(const Matrix& A_S, std::span<const double> y) {
  require(A_S.rows() == y.size(), "gram_solve: y.size() != A_S.rows()");
  const std::size_t k = A_S.cols();
  if (k > A_S.rows()) throw SingularSystemError("gram_solve: more columns than rows");

  // G = A_S^T A_S (lower triangle), b = A_S^T y
  std::vector<double> G(k * k, 0.0);
  Vector b(k, 0.0);
  for (std::size_t r = 0; r < A_S.rows(); ++r) {
    const auto row = A_S.row(r);
    for (std::size_t i = 0; i < k; ++i) {
      b[i] += row[i] * y[r];
      for (std::size_t j = 0; j <= i; ++j) G[i * k + j] += row[i] * row[j];
    }
  }
  OpCounter::add(A_S.rows() * k * (k + 3) / 2);

  double gmax = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) gmax = std::max(gmax, std::abs(G[i * k + j]));
  const double tol = 1e-12 * gmax;

  // In-place Cholesky, L stored in the lower triangle of G.
  for (std::size_t j = 0; j < k; ++j) {
    double d = G[j * k + j];
    for (std::size_t p = 0; p < j; ++p) d -= G[j * k + p] * G[j * k + p];
    if (!(d > tol)) {
      throw SingularSystemError("gram_solve: rank-deficient column set (pivot " +
                                std::to_string(j) + ")");
    }
    const double ljj = std::sqrt(d);
    G[j * k + j] = ljj;
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = G[i * k + j];
      for (std::size_t p = 0; p < j; ++p) s -= G[i * k + p] * G[j * k + p];
      G[i * k + j] = s / ljj;
    }
  }

  // L z = b, then L^T c = z.
  Vector c(k);
  for (std::size_t i = 0; i < k; ++i) {
    double s = b[i];
    for (std::size_t p = 0; p < i; ++p) s -= G[i * k + p] * c[p];
    c[i] = s / G[i * k + i];
  }
  for (std::size_t ii = k; ii-- > 0;) {
    double s = c[ii];
    for (std::size_t p = ii + 1; p < k; ++p) s -= G[p * k + ii] * c[p];
    c[ii] = s / G[ii * k + ii];
  }
  return c;
}

double spectral_norm_sq(const Matrix& A, std::size_t iters, std::uint64_t seed) {
  if (iters == 0) throw ConfigError("spectral_norm_sq: iters must be >= 1");
  Rng rng = make_rng(seed, {0x5eed});
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(A.cols());
  for (auto& e : v) e = normal(rng);
  Vector Av(A.rows());
  double estimate = 0.0;
  for (std::size_t t = 0; t < iters; ++t) {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    for (auto& e : v) e /= nv;
    matvec_into(A, v, Av);
    const double rq = dot(Av, Av);
    if (rq == 0.0) return 0.0;
    estimate = std::max(estimate, rq);
    matvec_transposed_into(A, Av, v);
  }
  return estimate;
}

}  // namespace rcs

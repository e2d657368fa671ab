#pragma once

// Sparse recovery: warm-startable proximal-gradient LASSO with KKT
// termination, orthogonal matching pursuit, and least squares restricted to a
// support.
//
// The LASSO objective is ||Ax - y||_2^2 + lambda ||x||_1. With
// g = A^T (y - Ax), x is optimal iff g_i = (lambda/2) sgn(x_i) on the support
// and |g_j| < lambda/2 elsewhere.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcs/numkernel.hpp"
#include "rcs/sensing.hpp"

namespace rcs {

/// Anything that can apply A and A^T. Implementations must be safe to call
/// concurrently from different threads.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> out) const = 0;
  virtual void apply_adjoint(std::span<const double> r, std::span<double> out) const = 0;
  virtual Vector column(std::size_t j) const;
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(const Matrix& A) : A_(&A) {}
  std::size_t rows() const override { return A_->rows(); }
  std::size_t cols() const override { return A_->cols(); }
  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply_adjoint(std::span<const double> r, std::span<double> out) const override;
  Vector column(std::size_t j) const override { return A_->column(j); }

 private:
  const Matrix* A_;
};

/// A(i) = A(0) P^offset without materializing it.
class RotatedView final : public LinearOperator {
 public:
  RotatedView(const SensingMatrix& A, PermutationOffset off);
  std::size_t rows() const override { return A_->rows(); }
  std::size_t cols() const override { return A_->cols(); }
  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply_adjoint(std::span<const double> r, std::span<double> out) const override;
  Vector column(std::size_t j) const override;
  const PermutationOffset& offset() const noexcept { return off_; }

 private:
  const SensingMatrix* A_;
  PermutationOffset off_;
};

struct LassoProblem {
  const LinearOperator& A;
  std::span<const double> y;
  double lambda = 0.0;
};

struct FistaOptions {
  /// KKT tolerance; <= 0 selects 1e-6 * lambda (or 1e-12 when lambda == 0).
  double eps = 0.0;
  std::size_t max_iter = 10000;
  /// Accept a proximal step only if it does not increase the objective.
  bool monotone = true;
  /// Reset the momentum whenever a step fails to decrease the objective.
  bool restart = true;
  /// lambda_max(A^T A); <= 0 means estimate it by power iteration.
  double lipschitz = 0.0;
};

struct SolverReport {
  Vector x_hat;
  std::size_t iterations = 0;
  double kkt_residual = 0.0;
  double objective = 0.0;
  /// False when max_iter was reached before the KKT test passed.
  bool converged = false;
};

double soft_threshold(double v, double t);

/// ||Ax - y||^2 + lambda ||x||_1
double lasso_objective(const LinearOperator& A, std::span<const double> y, double lambda,
                       std::span<const double> x);

struct KktCheck {
  double residual = 0.0;  ///< max violation over both index sets
  bool satisfied = false;
};

/// Epsilon-optimality test from the gradient g = A^T (y - Ax).
KktCheck kkt_check(std::span<const double> g, std::span<const double> x, double lambda, double eps);

/// Power-iteration estimate of lambda_max(A^T A) for an operator.
double estimate_lipschitz(const LinearOperator& A, std::size_t iters = 100, std::uint64_t seed = 0);

SolverReport fista(const LassoProblem& prob, std::span<const double> x0,
                   const FistaOptions& opts = {});

struct OmpReport {
  Vector x;
  std::vector<std::size_t> support;  ///< in selection order
  std::size_t iterations = 0;
  double residual_norm = 0.0;
};

/// Greedy selection by largest |<r, a_j>| / ||a_j||, least squares refit each
/// iteration. Stops when ||r|| <= gamma or max_atoms columns are selected.
OmpReport omp(const LinearOperator& A, std::span<const double> y, std::size_t max_atoms,
              double gamma = 0.0);

/// Length-n vector: zero off the support, least squares on it.
Vector lse_on_support(const LinearOperator& A, std::span<const double> y,
                      std::span<const std::size_t> support);

}  // namespace rcs

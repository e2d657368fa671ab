#include <gtest/gtest.h>

#include <cmath>

#include "rcs/decoder.hpp"
#include "rcs/encoder.hpp"
#include "rcs/errors.hpp"
#include "rcs/signal.hpp"
#include "rcs/solvers.hpp"
#include "test_util.hpp"

using namespace rcs;

namespace {

// KKT residual recomputed from scratch with a naive product.
double independent_kkt(const Matrix& A, const Vector& y, const Vector& x, double lambda) {
  Vector r = y;
  const Vector Ax = test::ref_matvec(A, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= Ax[i];
  const Vector g = test::ref_matvec(A.transposed(), r);
  double worst = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) worst = std::max(worst, std::abs(g[j] - (x[j] > 0 ? 1 : -1) * lambda / 2));
    else worst = std::max(worst, std::abs(g[j]) - lambda / 2);
  }
  return worst;
}

}  // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(3, 1), 2);
  EXPECT_EQ(soft_threshold(-0.5, 1), 0);
  EXPECT_EQ(soft_threshold(-3, 1), -2);
}

TEST(Fista, ScalarClosedForms) {
  const Matrix A = Matrix::from_rows({{1}});
  const DenseOperator op(A);
  const Vector y{1};
  FistaOptions o;
  o.eps = 1e-12;
  EXPECT_NEAR(fista({op, y, 1.0}, Vector{0}, o).x_hat[0], 0.5, 1e-8);
  EXPECT_NEAR(fista({op, y, 4.0}, Vector{0}, o).x_hat[0], 0.0, 1e-8);
  EXPECT_NEAR(fista({op, y, 1.0}, Vector{7}, o).x_hat[0], 0.5, 1e-8);
}

// Candidate minimizer restricted to the planted support with the planted
// signs: x_S = (A_S^T A_S)^{-1} (A_S^T y - lambda/2 sgn). It is the LASSO
// minimizer iff its signs agree and |a_j^T r| <= lambda/2 off the support.
bool planted_support_is_optimal(const Matrix& A, const Vector& y, const Vector& x, double lambda) {
  std::vector<std::size_t> S;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] != 0.0) S.push_back(j);
  const std::size_t k = S.size(), m = A.rows();
  Matrix G(k, k);
  Vector rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += A(i, S[a]) * y[i];
    rhs[a] = s - lambda / 2 * (x[S[a]] > 0 ? 1 : -1);
    for (std::size_t b = 0; b < k; ++b) {
      double g = 0.0;
      for (std::size_t i = 0; i < m; ++i) g += A(i, S[a]) * A(i, S[b]);
      G(a, b) = g;
    }
  }
  // Small dense solve by Gaussian elimination with partial pivoting.
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(G(r, c)) > std::abs(G(p, c))) p = r;
    for (std::size_t q = 0; q < k; ++q) std::swap(G(c, q), G(p, q));
    std::swap(rhs[c], rhs[p]);
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = G(r, c) / G(c, c);
      for (std::size_t q = c; q < k; ++q) G(r, q) -= f * G(c, q);
      rhs[r] -= f * rhs[c];
    }
  }
  Vector c(k);
  for (std::size_t r = k; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t q = r + 1; q < k; ++q) s -= G(r, q) * c[q];
    c[r] = s / G(r, r);
  }
  Vector cand(x.size(), 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    if ((c[a] > 0) != (x[S[a]] > 0)) return false;
    cand[S[a]] = c[a];
  }
  const Vector Ax = test::ref_matvec(A, cand);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) continue;
    double g = 0.0;
    for (std::size_t i = 0; i < m; ++i) g += A(i, j) * (y[i] - Ax[i]);
    if (std::abs(g) >= lambda / 2) return false;
  }
  return true;
}

TEST(Fista, PlantedNoiselessRecovery) {
  // Exact support recovery is claimed where the planted support carries the
  // LASSO minimizer; elsewhere the minimizer itself has extra (tiny) entries.
  const std::size_t n = 128, m = 48, k = 5;
  std::size_t certified = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SensingMatrix A = gen_gaussian(m, n, s);
    const Vector x = test::sparse_vector(n, k, 50 + s);
    const Vector y = matvec(A.base, x);
    const DenseOperator op(A.base);
    FistaOptions o;
    o.max_iter = 100000;
    const SolverReport r = fista({op, y, 1e-4}, Vector(n, 0.0), o);
    EXPECT_TRUE(r.converged) << "seed " << s;
    Vector d = r.x_hat;
    axpy(-1.0, x, d);
    EXPECT_LE(norm2(d), 1e-2);
    for (std::size_t j = 0; j < n; ++j)
      if (x[j] != 0.0) EXPECT_NE(r.x_hat[j], 0.0) << "seed " << s << " j=" << j;
    if (!planted_support_is_optimal(A.base, y, x, 1e-4)) continue;
    ++certified;
    for (std::size_t j = 0; j < n; ++j)
      EXPECT_EQ(r.x_hat[j] != 0.0, x[j] != 0.0) << "seed " << s << " j=" << j;
  }
  EXPECT_GE(certified, 5u);
}

TEST(Fista, KktCertificateAndMonotoneEnvelope) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 60, m = 25;
    const SensingMatrix A = gen_gaussian(m, n, 100 + s);
    const Vector x = test::sparse_vector(n, 4, s);
    Vector y = matvec(A.base, x);
    axpy(1.0, noise_draw({0.1, s}, m, 0), y);
    const double lambda = 0.3 + 0.05 * static_cast<double>(s);
    const DenseOperator op(A.base);
    const Vector x0 = test::random_vector(n, 900 + s, 0.5);
    for (bool monotone : {true, false}) {
      FistaOptions o;
      o.monotone = monotone;
      const SolverReport r = fista({op, y, lambda}, x0, o);
      ASSERT_TRUE(r.converged);
      const double eps = 1e-6 * lambda;
      EXPECT_LE(independent_kkt(A.base, y, r.x_hat, lambda), eps * (1 + 1e-6));
      EXPECT_LE(r.kkt_residual, eps);
      EXPECT_NEAR(r.objective, lasso_objective(op, y, lambda, r.x_hat), 1e-9 * (1 + r.objective));
      if (monotone) EXPECT_LE(r.objective, lasso_objective(op, y, lambda, x0));
    }
  }
}

TEST(Fista, MonotoneObjectiveNeverIncreasesAlongIterations) {
  const std::size_t n = 80, m = 30;
  const SensingMatrix A = gen_gaussian(m, n, 7);
  Vector y = matvec(A.base, test::sparse_vector(n, 5, 1));
  axpy(1.0, noise_draw({0.1, 2}, m, 0), y);
  const DenseOperator op(A.base);
  double prev = lasso_objective(op, y, 0.5, Vector(n, 0.0));
  for (std::size_t it = 1; it < 60; ++it) {
    FistaOptions o;
    o.max_iter = it;
    const double f = fista({op, y, 0.5}, Vector(n, 0.0), o).objective;
    EXPECT_LE(f, prev + 1e-12);
    prev = f;
  }
}

TEST(Fista, StartsAtOptimumReturnsImmediately) {
  const Matrix A = Matrix::from_rows({{1}});
  const DenseOperator op(A);
  const SolverReport r = fista({op, Vector{1}, 1.0}, Vector{0.5});
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_TRUE(r.converged);
}

TEST(Fista, MaxIterIsReportedNotThrown) {
  const SensingMatrix A = gen_gaussian(20, 50, 1);
  const Vector y = matvec(A.base, test::sparse_vector(50, 3, 2));
  const DenseOperator op(A.base);
  FistaOptions o;
  o.max_iter = 2;
  const SolverReport r = fista({op, y, 1e-3}, Vector(50, 0.0), o);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
}

TEST(Fista, InputValidation) {
  const Matrix A = Matrix::from_rows({{1, 0}});
  const DenseOperator op(A);
  EXPECT_THROW(fista({op, Vector{1, 2}, 1.0}, Vector{0, 0}), DimensionError);
  EXPECT_THROW(fista({op, Vector{1}, 1.0}, Vector{0}), DimensionError);
  EXPECT_THROW(fista({op, Vector{1}, -1.0}, Vector{0, 0}), ConfigError);
  EXPECT_THROW(fista({op, Vector{NAN}, 1.0}, Vector{0, 0}), NumericalError);
  EXPECT_THROW(fista({op, Vector{1}, 1.0}, Vector{INFINITY, 0}), NumericalError);
}

TEST(KktCheck, TieOnZeroSetCountsAsViolation) {
  // g exactly lambda/2 + eps on a zero coordinate.
  EXPECT_FALSE(kkt_check(Vector{1.5}, Vector{0.0}, 2.0, 0.5).satisfied);
  EXPECT_TRUE(kkt_check(Vector{1.4}, Vector{0.0}, 2.0, 0.5).satisfied);
  EXPECT_TRUE(kkt_check(Vector{1.0}, Vector{3.0}, 2.0, 1e-12).satisfied);
  EXPECT_FALSE(kkt_check(Vector{-1.0}, Vector{3.0}, 2.0, 1e-12).satisfied);
}

TEST(RotatedView, MatchesMaterializedOperator) {
  const std::size_t n = 13;
  const SensingMatrix A = gen_gaussian(5, n, 3);
  for (std::size_t off = 0; off < n; off += 4) {
    const RotatedView view(A, PermutationOffset(n, off));
    const Matrix M = materialize(A, PermutationOffset(n, off));
    const DenseOperator dense(M);
    const Vector x = test::random_vector(n, off), r = test::random_vector(5, 50 + off);
    Vector a(5), b(5), c(n), d(n);
    view.apply(x, a);
    dense.apply(x, b);
    view.apply_adjoint(r, c);
    dense.apply_adjoint(r, d);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(c[j], d[j], 1e-13);
    EXPECT_EQ(view.column(2), M.column(2));
  }
}

TEST(Lipschitz, OperatorEstimateMatchesMatrix) {
  const SensingMatrix A = gen_gaussian(10, 30, 2);
  const DenseOperator op(A.base);
  EXPECT_NEAR(estimate_lipschitz(op), spectral_norm_sq(A.base), 1e-6 * spectral_norm_sq(A.base));
  // Rotation leaves the spectrum alone.
  EXPECT_NEAR(estimate_lipschitz(RotatedView(A, PermutationOffset(30, 11))), spectral_norm_sq(A.base),
              1e-6 * spectral_norm_sq(A.base));
}

TEST(Omp, IdentityOneStep) {
  const Matrix I = Matrix::identity(5);
  const DenseOperator op(I);
  const OmpReport r = omp(op, Vector{0, 0, 3, 0, 0}, 4);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.x, (Vector{0, 0, 3, 0, 0}));
}

TEST(Omp, ZeroMeasurement) {
  const SensingMatrix A = gen_gaussian(5, 10, 1);
  const DenseOperator op(A.base);
  const OmpReport r = omp(op, Vector(5, 0.0), 3);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.x, Vector(10, 0.0));
}

TEST(Omp, PlantedExactRecovery) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SensingMatrix A = gen_gaussian(40, 200, 300 + s);
    const Vector x = test::sparse_vector(200, 4, s);
    const DenseOperator op(A.base);
    const OmpReport r = omp(op, matvec(A.base, x), 4);
    for (std::size_t j = 0; j < 200; ++j) EXPECT_NEAR(r.x[j], x[j], 1e-8);
  }
}

TEST(Omp, ResidualOrthogonalAfterEveryIteration) {
  const SensingMatrix A = gen_gaussian(30, 90, 5);
  const DenseOperator op(A.base);
  Vector y = matvec(A.base, test::sparse_vector(90, 8, 3));
  axpy(1.0, noise_draw({0.05, 1}, 30, 0), y);
  for (std::size_t t = 1; t <= 12; ++t) {
    const OmpReport r = omp(op, y, t);
    ASSERT_EQ(r.support.size(), t);
    Vector res = y;
    axpy(-1.0, matvec(A.base, r.x), res);
    EXPECT_NEAR(norm2(res), r.residual_norm, 1e-10);
    for (std::size_t s : r.support) EXPECT_LE(std::abs(dot(A.base.column(s), res)), 1e-9);
  }
}

TEST(Omp, StopsAtGammaAndRejectsTooManyAtoms) {
  const SensingMatrix A = gen_gaussian(10, 30, 2);
  const DenseOperator op(A.base);
  const Vector y = matvec(A.base, test::sparse_vector(30, 2, 1));
  EXPECT_LE(omp(op, y, 9, 1e3).iterations, 0u);
  EXPECT_THROW(omp(op, y, 10), ConfigError);
}

TEST(Lse, EmptySupportAndOrthonormalCase) {
  const Matrix I = Matrix::identity(4);
  const Matrix A = I.select_columns(std::vector<std::size_t>{0, 1, 2});  // 4 x 3
  const Matrix At = A.transposed();                                      // 3 x 4, rows orthonormal
  const DenseOperator op(At);
  EXPECT_EQ(lse_on_support(op, Vector{1, 2, 3}, std::vector<std::size_t>{}), Vector(4, 0.0));
  const Vector x{0, 5, 0, 0};
  const Vector est = lse_on_support(op, matvec(At, x), std::vector<std::size_t>{1});
  EXPECT_EQ(est, x);
}

TEST(Lse, SupportTooLargeThrows) {
  const SensingMatrix A = gen_gaussian(3, 10, 1);
  const DenseOperator op(A.base);
  EXPECT_THROW(lse_on_support(op, Vector(3, 0.0), std::vector<std::size_t>{0, 1, 2}), Error);
}

TEST(Lse, CovarianceTraceAndUnbiasedness) {
  const std::size_t n = 100, m = 40, trials = 1000;
  const double sigma = 0.1;
  const SensingMatrix A = gen_gaussian(m, n, 12);
  const DenseOperator op(A.base);
  const Vector x = test::sparse_vector(n, 5, 4, 1.0, 2.0);
  std::vector<std::size_t> S;
  for (std::size_t j = 0; j < n; ++j)
    if (x[j] != 0) S.push_back(j);
  const Vector clean = matvec(A.base, x);

  // sigma^2 tr((A_S^T A_S)^{-1}) via column-by-column gram solves.
  const Matrix AS = A.base.select_columns(S);
  double trace = 0.0;
  for (std::size_t k = 0; k < S.size(); ++k) {
    // (A_S^T A_S)^{-1} e_k = gram_solve(A_S, A_S (A_S^T A_S)^{-1} e_k); build the
    // right-hand side as the least-norm preimage instead: solve G c = e_k.
    Matrix G(S.size(), S.size());
    for (std::size_t a = 0; a < S.size(); ++a)
      for (std::size_t b = 0; b < S.size(); ++b) G(a, b) = dot(AS.column(a), AS.column(b));
    Vector e(S.size(), 0.0);
    e[k] = 1.0;
    trace += gram_solve(G, e)[k];  // G symmetric: G^T G c = G e gives the same c
  }
  const double predicted = sigma * sigma * trace;

  std::vector<Vector> lse(trials), lasso(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Vector y = clean;
    axpy(1.0, noise_draw({sigma, 99}, m, t), y);
    lse[t] = lse_on_support(op, y, S);
    lasso[t] = fista({op, y, default_lambda(sigma, n)}, Vector(n, 0.0)).x_hat;
  }
  double mse = 0.0;
  for (const auto& e : lse)
    for (std::size_t j : S) mse += (e[j] - x[j]) * (e[j] - x[j]);
  mse /= trials;
  EXPECT_NEAR(mse, predicted, 0.05 * predicted);

  bool lasso_biased = false;
  for (std::size_t j : S) {
    double mean = 0, sq = 0, lmean = 0, lsq = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      mean += lse[t][j];
      sq += lse[t][j] * lse[t][j];
      lmean += lasso[t][j];
      lsq += lasso[t][j] * lasso[t][j];
    }
    mean /= trials;
    lmean /= trials;
    const double se = std::sqrt((sq / trials - mean * mean) / trials);
    const double lse_se = std::sqrt(std::max(lsq / trials - lmean * lmean, 0.0) / trials);
    EXPECT_LE(std::abs(mean - x[j]), 3 * se) << "j=" << j;
    if (std::abs(lmean - x[j]) > 10 * std::max(lse_se, 1e-12)) lasso_biased = true;
  }
  EXPECT_TRUE(lasso_biased);
}

TEST(WarmStart, FewerIterationsThanColdOverStream) {
  const std::size_t n = 200, W = 120;
  const double p = 0.05, sigma = 0.1;
  const std::size_t m = static_cast<std::size_t>(6 * p * n);
  const SensingMatrix A = gen_gaussian(m, n, 3);
  const SparseStream s = gen_stream({p, 1.0, 2.0, 4, n + W});
  const NoiseModel noise{sigma, 5};
  const double lambda = default_lambda(sigma, n);
  FistaOptions o;
  o.lipschitz = spectral_norm_sq(A.base);
  std::vector<double> warm, cold;
  Vector prev;
  for (std::size_t i = 0; i < W; ++i) {
    const RotatedView view(A, PermutationOffset(n, i % n));
    const Vector y = encode_direct(A, PermutationOffset(n, i % n), window(s, i, n, 1), noise, i);
    const SolverReport c = fista({view, y, lambda}, Vector(n, 0.0), o);
    cold.push_back(static_cast<double>(c.iterations));
    if (i == 0) {
      prev = c.x_hat;
      continue;
    }
    const SolverReport w = fista({view, y, lambda}, warm_start(prev, 1, WarmTailPolicy::zeros), o);
    warm.push_back(static_cast<double>(w.iterations));
    prev = w.x_hat;
  }
  cold.erase(cold.begin());
  // Paired one-sided test at 3 sigma on the per-window differences.
  double md = 0, sd = 0;
  for (std::size_t i = 0; i < warm.size(); ++i) md += cold[i] - warm[i];
  md /= warm.size();
  for (std::size_t i = 0; i < warm.size(); ++i) sd += std::pow(cold[i] - warm[i] - md, 2);
  sd = std::sqrt(sd / (warm.size() - 1));
  EXPECT_GT(md, 3 * sd / std::sqrt(static_cast<double>(warm.size())));
}

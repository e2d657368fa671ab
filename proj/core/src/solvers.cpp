#include "rcs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcs/errors.hpp"
#include "rcs/random.hpp"

namespace rcs {

namespace {

// Power-iteration estimates approach lambda_max from below; the step uses a
// slightly inflated value so it never exceeds 1/(2 lambda_max).
constexpr double kLipschitzMargin = 1.01;

void residual_into(const LinearOperator& A, std::span<const double> y, std::span<const double> x,
                   std::span<double> Ax, std::span<double> r) {
  A.apply(x, Ax);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - Ax[i];
}

double l1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double objective_from(std::span<const double> Ax, std::span<const double> y, double lambda,
                      std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = Ax[i] - y[i];
    s += d * d;
  }
  return s + lambda * l1(x);
}

}  // namespace

Vector LinearOperator::column(std::size_t j) const {
  if (j >= cols()) throw BoundsError("LinearOperator::column: index out of range");
  Vector e(cols(), 0.0);
  e[j] = 1.0;
  Vector out(rows());
  apply(e, out);
  return out;
}

void DenseOperator::apply(std::span<const double> x, std::span<double> out) const {
  matvec_into(*A_, x, out);
}

void DenseOperator::apply_adjoint(std::span<const double> r, std::span<double> out) const {
  matvec_transposed_into(*A_, r, out);
}

RotatedView::RotatedView(const SensingMatrix& A, PermutationOffset off) : A_(&A), off_(off) {
  if (off.period() != A.cols()) throw DimensionError("RotatedView: offset period != n");
}

void RotatedView::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != cols()) throw DimensionError("RotatedView::apply: x.size() != n");
  // A(0) P^k x = A(0) v with v[base_column(j)] = x[j].
  const std::size_t n = cols();
  const std::size_t k = off_.value();
  Vector v(n);
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n - k),
            v.begin() + static_cast<std::ptrdiff_t>(k));
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(n - k), x.end(), v.begin());
  matvec_into(A_->base, v, out);
}

void RotatedView::apply_adjoint(std::span<const double> r, std::span<double> out) const {
  if (out.size() != cols()) throw DimensionError("RotatedView::apply_adjoint: out.size() != n");
  const std::size_t n = cols();
  const std::size_t k = off_.value();
  Vector g(n);
  matvec_transposed_into(A_->base, r, g);
  std::copy(g.begin() + static_cast<std::ptrdiff_t>(k), g.end(), out.begin());
  std::copy(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k),
            out.begin() + static_cast<std::ptrdiff_t>(n - k));
}

Vector RotatedView::column(std::size_t j) const { return rcs::column(*A_, off_, j); }

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double lasso_objective(const LinearOperator& A, std::span<const double> y, double lambda,
                       std::span<const double> x) {
  Vector Ax(A.rows());
  A.apply(x, Ax);
  return objective_from(Ax, y, lambda, x);
}

KktCheck kkt_check(std::span<const double> g, std::span<const double> x, double lambda,
                   double eps) {
  if (g.size() != x.size()) throw DimensionError("kkt_check: g and x differ in length");
  const double half = lambda / 2.0;
  KktCheck out{0.0, true};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      const double v = std::abs(g[i] - (x[i] > 0 ? half : -half));
      out.residual = std::max(out.residual, v);
      if (v > eps) out.satisfied = false;
    } else {
      const double v = std::abs(g[i]);
      out.residual = std::max(out.residual, std::max(0.0, v - half));
      if (!(v < half + eps)) out.satisfied = false;
    }
  }
  return out;
}

double estimate_lipschitz(const LinearOperator& A, std::size_t iters, std::uint64_t seed) {
  if (iters == 0) throw ConfigError("estimate_lipschitz: iters must be >= 1");
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
    A.apply(v, Av);
    const double rq = dot(Av, Av);
    if (rq == 0.0) return 0.0;
    estimate = std::max(estimate, rq);
    A.apply_adjoint(Av, v);
  }
  return estimate;
}

SolverReport fista(const LassoProblem& prob, std::span<const double> x0, const FistaOptions& opts) {
  const LinearOperator& A = prob.A;
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  if (prob.y.size() != m) throw DimensionError("fista: y.size() != rows");
  if (x0.size() != n) throw DimensionError("fista: x0.size() != cols");
  if (!(prob.lambda >= 0.0)) throw ConfigError("fista: lambda must be >= 0");

  for (double v : prob.y)
    if (!std::isfinite(v)) throw NumericalError("fista: non-finite measurement");
  for (double v : x0)
    if (!std::isfinite(v)) throw NumericalError("fista: non-finite starting point");

  const double lambda = prob.lambda;
  const double eps = opts.eps > 0.0 ? opts.eps : (lambda > 0.0 ? 1e-6 * lambda : 1e-12);
  double L = opts.lipschitz > 0.0 ? opts.lipschitz : estimate_lipschitz(A);
  L *= kLipschitzMargin;

  SolverReport rep;
  rep.x_hat.assign(x0.begin(), x0.end());
  Vector Ax(m), r(m), g(n);
  residual_into(A, prob.y, rep.x_hat, Ax, r);
  A.apply_adjoint(r, g);
  double Fx = objective_from(Ax, prob.y, lambda, rep.x_hat);

  auto finish = [&](const KktCheck& k) {
    rep.kkt_residual = k.residual;
    rep.objective = Fx;
    rep.converged = k.satisfied;
    return rep;
  };

  KktCheck kkt = kkt_check(g, rep.x_hat, lambda, eps);
  if (kkt.satisfied || L == 0.0) return finish(kkt);

  const double step = 1.0 / L;           // gradient of the smooth part is -2g, step 1/(2L)
  const double shrink = lambda / (2.0 * L);

  // g(v) = A^T(y - Av) is affine in v, so the gradient at the extrapolated
  // point is the same combination of gradients already computed: two
  // operator applications per iteration.
  Vector& x = rep.x_hat;
  Vector x_prev = x, Ax_prev = Ax, g_prev = g;
  Vector w = x, gw = g;
  Vector z(n), Az(m), gz(n);
  double t = 1.0;
  // A proximal step taken from x itself cannot increase the objective; an
  // apparent increase there is rounding and is accepted.
  bool from_x = true;

  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) z[j] = soft_threshold(w[j] + step * gw[j], shrink);
    A.apply(z, Az);
    for (std::size_t i = 0; i < m; ++i) r[i] = prob.y[i] - Az[i];
    A.apply_adjoint(r, gz);
    const double Fz = objective_from(Az, prob.y, lambda, z);
    if (!std::isfinite(Fz)) throw NumericalError("fista: objective became non-finite");
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const bool increased = Fz > Fx;

    x_prev.swap(x);
    Ax_prev.swap(Ax);
    g_prev.swap(g);
    const bool accept = !opts.monotone || !increased || from_x;
    if (accept) {
      x = z;
      Ax = Az;
      g = gz;
      Fx = Fz;
    } else {
      x = x_prev;
      Ax = Ax_prev;
      g = g_prev;
    }
    rep.iterations = it;
    kkt = kkt_check(g, x, lambda, eps);
    if (kkt.satisfied) return finish(kkt);

    // w = x + (t/t_next)(z - x) + ((t-1)/t_next)(x - x_prev)
    double cz = t / t_next;
    double cx = (t - 1.0) / t_next;
    if (opts.restart && increased) {
      t_next = 1.0;
      cz = accept ? 1.0 : 0.0;
      cx = 0.0;
    }
    from_x = cz == 0.0 && cx == 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = x[j] + cz * (z[j] - x[j]) + cx * (x[j] - x_prev[j]);
      gw[j] = g[j] + cz * (gz[j] - g[j]) + cx * (g[j] - g_prev[j]);
    }
    t = t_next;
  }
  return finish(kkt);
}

OmpReport omp(const LinearOperator& A, std::span<const double> y, std::size_t max_atoms,
              double gamma) {
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  if (y.size() != m) throw DimensionError("omp: y.size() != rows");
  if (max_atoms >= m) throw ConfigError("omp: max_atoms must be < m");

  std::vector<Vector> cols(n);
  Vector norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    cols[j] = A.column(j);
    norms[j] = norm2(cols[j]);
  }

  OmpReport rep;
  rep.x.assign(n, 0.0);
  Vector r(y.begin(), y.end());
  Vector corr(n);
  std::vector<bool> chosen(n, false);
  Vector coef;
  rep.residual_norm = norm2(r);

  while (rep.residual_norm > gamma && rep.support.size() < max_atoms) {
    A.apply_adjoint(r, corr);
    std::size_t best = n;
    double best_val = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (chosen[j] || norms[j] == 0.0) continue;
      const double v = std::abs(corr[j]) / norms[j];
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    if (best == n) break;  // residual orthogonal to every remaining column
    chosen[best] = true;
    rep.support.push_back(best);

    Matrix A_S(m, rep.support.size());
    for (std::size_t k = 0; k < rep.support.size(); ++k)
      for (std::size_t i = 0; i < m; ++i) A_S(i, k) = cols[rep.support[k]][i];
    coef = gram_solve(A_S, y);
    const Vector fit = matvec(A_S, coef);
    for (std::size_t i = 0; i < m; ++i) r[i] = y[i] - fit[i];
    rep.residual_norm = norm2(r);
    ++rep.iterations;
  }
  for (std::size_t k = 0; k < rep.support.size(); ++k) rep.x[rep.support[k]] = coef[k];
  return rep;
}

Vector lse_on_support(const LinearOperator& A, std::span<const double> y,
                      std::span<const std::size_t> support) {
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  if (y.size() != m) throw DimensionError("lse_on_support: y.size() != rows");
  Vector x(n, 0.0);
  if (support.empty()) return x;
  if (support.size() >= m) throw ConfigError("lse_on_support: |support| must be < m");
  Matrix A_S(m, support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] >= n) throw BoundsError("lse_on_support: support index out of range");
    const Vector c = A.column(support[k]);
    for (std::size_t i = 0; i < m; ++i) A_S(i, k) = c[i];
  }
  const Vector c = gram_solve(A_S, y);
  for (std::size_t k = 0; k < support.size(); ++k) x[support[k]] = c[k];
  return x;
}

}  // namespace rcs

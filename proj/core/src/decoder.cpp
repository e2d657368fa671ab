#include "rcs/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rcs {

std::string_view to_string(Combiner c) {
  switch (c) {
    case Combiner::voting: return "voting";
    case Combiner::average_only: return "average_only";
    case Combiner::debias_no_voting: return "debias_no_voting";
  }
  return "unknown";
}

Combiner parse_combiner(std::string_view name) {
  if (name == "voting") return Combiner::voting;
  if (name == "average_only") return Combiner::average_only;
  if (name == "debias_no_voting") return Combiner::debias_no_voting;
  throw ConfigError("unknown combiner '" + std::string(name) + "'");
}

Detector parse_detector(std::string_view name) {
  if (name == "threshold") return Detector::threshold;
  if (name == "annihilate_topk" || name == "annihilate") return Detector::annihilate_topk;
  throw ConfigError("unknown detector '" + std::string(name) + "'");
}

WarmTailPolicy parse_warm_tail(std::string_view name) {
  if (name == "zeros") return WarmTailPolicy::zeros;
  if (name == "hold") return WarmTailPolicy::hold;
  throw ConfigError("unknown warm tail policy '" + std::string(name) + "'");
}

double default_lambda(double sigma, std::size_t n) {
  return 4.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

std::size_t RcsConfig::effective_xi2() const noexcept {
  if (xi2 != 0) return xi2;
  return (n + 2 * tau - 1) / (2 * tau);
}

void RcsConfig::validate() const {
  if (n < 2) throw ConfigError("rcs: n must be >= 2");
  if (tau < 1 || tau > n) throw ConfigError("rcs: need 1 <= tau <= n");
  if (!(lambda >= 0.0)) throw ConfigError("rcs: lambda must be >= 0");
  if (!(xi1 > 0.0)) throw ConfigError("rcs: xi1 must be > 0");
  const std::size_t x2 = effective_xi2();
  if (x2 < 1 || x2 > coverage())
    throw ConfigError("rcs: xi2 must lie in [1, floor(n/tau)]");
  if (detector == Detector::annihilate_topk && (xi3 < 1 || xi3 > x2))
    throw ConfigError("rcs: annihilation detector needs 1 <= xi3 <= xi2");
}

// ---------------------------------------------------------------- VoteLedger

VoteLedger::Entry& VoteLedger::at(std::size_t g) {
  if (g < base_) throw BoundsError("ledger: index already finalized");
  if (g >= horizon_end()) entries_.resize(g - base_ + 1);
  return entries_[g - base_];
}

const VoteLedger::Entry& VoteLedger::at(std::size_t g) const {
  static const Entry kEmpty{};
  if (g < base_) throw BoundsError("ledger: index already finalized");
  if (g >= horizon_end()) return kEmpty;
  return entries_[g - base_];
}

std::uint32_t VoteLedger::votes(std::size_t g) const { return at(g).votes; }
std::uint32_t VoteLedger::recoveries(std::size_t g) const { return at(g).recoveries; }
double VoteLedger::average(std::size_t g) const { return at(g).mean; }

void VoteLedger::record(Entry& e, double value) {
  ++e.recoveries;
  e.mean += (value - e.mean) / static_cast<double>(e.recoveries);
  if (keep_) e.contributions.push_back(value);
}

void VoteLedger::cast_votes(std::span<const std::size_t> support, std::size_t window_start) {
  for (std::size_t j : support) ++at(window_start + j).votes;
}

std::vector<std::size_t> VoteLedger::accepted_support(std::size_t window_start, std::size_t n,
                                                      std::size_t xi2, std::size_t m,
                                                      std::size_t tau) const {
  const std::size_t full = tau > 0 ? std::max<std::size_t>(n / tau, 1) : 0;
  auto threshold = [&](std::size_t g) {
    if (tau == 0) return xi2;
    const std::size_t cov = g / tau + 1;
    if (cov >= full) return xi2;
    return std::max<std::size_t>(1, (xi2 * cov + full - 1) / full);
  };
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j)
    if (votes(window_start + j) >= threshold(window_start + j)) out.push_back(j);
  if (m == 0 || out.size() < m) return out;

  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return votes(window_start + a) > votes(window_start + b);
  });
  out.resize(m - 1);
  return out;
}

void VoteLedger::update_averages(std::span<const double> x_tilde,
                                 std::span<const std::size_t> support, std::size_t window_start) {
  for (std::size_t j : support) {
    if (j >= x_tilde.size()) throw BoundsError("update_averages: support outside window");
    record(at(window_start + j), x_tilde[j]);
  }
}

void VoteLedger::update_all(std::span<const double> x, std::size_t window_start) {
  for (std::size_t j = 0; j < x.size(); ++j) record(at(window_start + j), x[j]);
}

std::vector<Emission> VoteLedger::finalize_before(std::size_t end, std::uint64_t window) {
  std::vector<Emission> out;
  if (end > horizon_end()) at(end - 1);  // materialize never-touched indices
  while (base_ < end) {
    Entry& e = entries_.front();
    out.push_back({base_, e.mean, e.votes, e.recoveries, window, std::move(e.contributions)});
    entries_.pop_front();
    ++base_;
  }
  return out;
}

// ------------------------------------------------------------ free functions

Vector warm_start(std::span<const double> prev, std::size_t tau, WarmTailPolicy policy) {
  const std::size_t n = prev.size();
  Vector out(n, 0.0);
  if (tau >= n) return out;
  std::copy(prev.begin() + static_cast<std::ptrdiff_t>(tau), prev.end(), out.begin());
  if (policy == WarmTailPolicy::hold && n > 0)
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(n - tau), out.end(), prev.back());
  return out;
}

std::vector<std::size_t> detect_support_threshold(std::span<const double> x_hat, double xi1) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < x_hat.size(); ++j)
    if (std::abs(x_hat[j]) >= xi1) out.push_back(j);
  return out;
}

AnnihilationResult detect_support_annihilate(std::span<const double> y, const LinearOperator& A,
                                             std::span<const double> x_warm, double lambda,
                                             std::size_t xi3, const FistaOptions& opts) {
  const std::size_t n = A.cols();
  if (x_warm.size() != n) throw DimensionError("annihilate: x_warm.size() != n");
  if (xi3 < 1) throw ConfigError("annihilate: xi3 must be >= 1");

  Vector residual(A.rows());
  A.apply(x_warm, residual);
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = y[i] - residual[i];

  AnnihilationResult res;
  const Vector zero(n, 0.0);
  res.residual_report = fista({A, residual, lambda}, zero, opts);
  const Vector& e = res.residual_report.x_hat;

  std::vector<bool> in(n, false);
  for (std::size_t j = 0; j < n; ++j)
    if (x_warm[j] != 0.0) in[j] = true;

  if (norm_inf(e) < 1e-12 && xi3 < n) {
    res.skipped_topk = true;
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t k = std::min(xi3, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double ma = std::abs(e[a]), mb = std::abs(e[b]);
                        return ma != mb ? ma > mb : a < b;
                      });
    for (std::size_t t = 0; t < k; ++t) in[order[t]] = true;
  }
  for (std::size_t j = 0; j < n; ++j)
    if (in[j]) res.support.push_back(j);
  return res;
}

// --------------------------------------------------------------- RcsPipeline

RcsPipeline::RcsPipeline(const SensingMatrix& A, RcsConfig cfg)
    : A_(&A), cfg_(std::move(cfg)), ledger_(cfg_.keep_contributions) {
  if (cfg_.n != A.cols()) throw ConfigError("rcs: config n != sensing matrix columns");
  cfg_.validate();
  lipschitz_ = cfg_.solver.lipschitz > 0.0 ? cfg_.solver.lipschitz : spectral_norm_sq(A.base);
  cfg_.solver.lipschitz = lipschitz_;
}

std::vector<Emission> RcsPipeline::step(std::span<const double> y) {
  const std::uint64_t i = next_window_;
  const std::size_t n = cfg_.n;
  const std::size_t m = A_->rows();
  const std::size_t start = static_cast<std::size_t>(i) * cfg_.tau;
  if (y.size() != m) throw DimensionError("rcs step: y.size() != m");

  const RotatedView view(*A_, PermutationOffset(n, start % n));
  WindowEstimate est;
  est.window = i;

  try {
    const Vector x0 = (last_ && cfg_.warm_start) ? warm_start(last_->lasso, cfg_.tau, cfg_.warm_tail)
                                                 : Vector(n, 0.0);
    if (cfg_.detector == Detector::threshold) {
      est.report = fista({view, y, cfg_.lambda}, x0, cfg_.solver);
      est.lasso = est.report.x_hat;
      est.detected = detect_support_threshold(est.lasso, cfg_.xi1);
    } else {
      const Vector prior =
          last_ ? warm_start(last_->debiased, cfg_.tau, WarmTailPolicy::zeros) : Vector(n, 0.0);
      auto ann = detect_support_annihilate(y, view, prior, cfg_.lambda, cfg_.xi3, cfg_.solver);
      est.report = std::move(ann.residual_report);
      est.lasso = est.report.x_hat;
      for (std::size_t j = 0; j < n; ++j) est.lasso[j] += prior[j];
      est.detected = std::move(ann.support);
    }

    ledger_.cast_votes(est.detected, start);
    switch (cfg_.combiner) {
      case Combiner::voting:
        est.support = ledger_.accepted_support(start, n, cfg_.effective_xi2(), m, cfg_.tau);
        est.debiased = lse_on_support(view, y, est.support);
        ledger_.update_averages(est.debiased, est.support, start);
        break;
      case Combiner::average_only:
        est.support = est.detected;
        est.debiased = est.lasso;
        ledger_.update_all(est.lasso, start);
        break;
      case Combiner::debias_no_voting: {
        est.support = est.detected;
        if (est.support.size() >= m) {
          std::stable_sort(est.support.begin(), est.support.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(est.lasso[a]) > std::abs(est.lasso[b]);
          });
          est.support.resize(m - 1);
          std::sort(est.support.begin(), est.support.end());
        }
        est.debiased = lse_on_support(view, y, est.support);
        ledger_.update_all(est.debiased, start);
        break;
      }
    }
  } catch (const WindowError&) {
    throw;
  } catch (const Error& e) {
    throw WindowError(i, e.what());
  }

  last_ = std::move(est);
  ++next_window_;
  return ledger_.finalize_before(start + cfg_.tau, i);
}

std::vector<Emission> RcsPipeline::finish() {
  if (next_window_ == 0) return {};
  const std::uint64_t last = next_window_ - 1;
  const std::size_t end = static_cast<std::size_t>(last) * cfg_.tau + cfg_.n;
  return ledger_.finalize_before(end, last);
}

// ------------------------------------------------------ forgetting estimate

JointEstimate forgetting_joint_estimate(const SensingMatrix& A,
                                        std::span<const WindowMeasurement> windows,
                                        std::size_t tau, double rho, double lambda,
                                        const FistaOptions& opts, std::size_t max_entries) {
  const std::size_t T = windows.size();
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  if (T == 0) throw ConfigError("forgetting: need at least one window");
  if (tau < 1 || tau > n) throw ConfigError("forgetting: need 1 <= tau <= n");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("forgetting: rho must lie in [0, 1)");
  const std::size_t N = n + (T - 1) * tau;
  if (T * m * N > max_entries) throw ConfigError("forgetting: stacked design exceeds memory cap");

  // Newest window has weight 1; rho^0 == 1 even when rho == 0.
  Vector weight(T);
  for (std::size_t k = 0; k < T; ++k)
    weight[k] = (k + 1 == T) ? 1.0 : std::pow(rho, static_cast<double>(T - 1 - k));

  // l1 weight of each shared unknown: sum of the weights of windows containing it.
  Vector c(N, 0.0);
  for (std::size_t k = 0; k < T; ++k)
    for (std::size_t j = 0; j < n; ++j) c[k * tau + j] += weight[k];

  std::vector<std::size_t> active;
  for (std::size_t g = 0; g < N; ++g)
    if (c[g] > 0.0) active.push_back(g);
  std::vector<std::size_t> col_of(N, N);
  for (std::size_t a = 0; a < active.size(); ++a) col_of[active[a]] = a;

  // Row block k: sqrt(w_k) A(k) on columns [k tau, k tau + n), column g scaled
  // by 1/c_g so the penalty becomes a plain lambda ||u||_1 with u_g = c_g x_g.
  Matrix D(T * m, active.size());
  Vector b(T * m);
  for (std::size_t k = 0; k < T; ++k) {
    const auto& w = windows[k];
    if (w.y.size() != m) throw DimensionError("forgetting: y.size() != m");
    if (w.offset.period() != n) throw DimensionError("forgetting: offset period != n");
    const double s = std::sqrt(weight[k]);
    for (std::size_t r = 0; r < m; ++r) {
      b[k * m + r] = s * w.y[r];
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t g = k * tau + j;
        if (col_of[g] == N) continue;
        D(k * m + r, col_of[g]) += s * A.base(r, w.offset.base_column(j)) / c[g];
      }
    }
  }

  const DenseOperator op(D);
  FistaOptions o = opts;
  if (o.lipschitz <= 0.0) o.lipschitz = spectral_norm_sq(D);
  const Vector u0(active.size(), 0.0);
  JointEstimate out;
  out.report = fista({op, b, lambda}, u0, o);
  out.joint.assign(N, 0.0);
  for (std::size_t a = 0; a < active.size(); ++a)
    out.joint[active[a]] = out.report.x_hat[a] / c[active[a]];
  out.current.assign(out.joint.end() - static_cast<std::ptrdiff_t>(n), out.joint.end());
  return out;
}

}  // namespace rcs

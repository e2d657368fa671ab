#include "rcs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "rcs/errors.hpp"
#include "rcs/random.hpp"

namespace rcs {

namespace {

using Clock = std::chrono::steady_clock;

double mean_of(std::span<const std::size_t> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (auto x : v) s += static_cast<double>(x);
  return s / static_cast<double>(v.size());
}

double sd_of(std::span<const std::size_t> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (auto x : v) s += (static_cast<double>(x) - mu) * (static_cast<double>(x) - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double squared_error(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

std::size_t worker_threads() {
  if (const char* env = std::getenv("RCS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first_error) first_error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

std::size_t m_rule_6pn(double p, std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(6.0 * p * n)));
}

std::size_t m_rule_5kbar(double p, std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(5.0 * p * n)));
}

// --------------------------------------------------------------- run_stream

StreamRunResult run_stream(const SensingMatrix& A, std::span<const double> stream,
                           const StreamRunOptions& opts) {
  const RcsConfig& cfg = opts.rcs;
  const std::size_t n = cfg.n;
  const std::size_t tau = cfg.tau;
  std::size_t W = window_count(stream.size(), n, tau);
  if (opts.max_windows) W = std::min(W, opts.max_windows);
  if (W == 0) throw ConfigError("run_stream: stream shorter than one window");

  RcsPipeline pipe(A, cfg);
  StreamRunResult res;
  res.iterations.reserve(W);
  res.window_seconds.reserve(W);
  const std::size_t covered = (W - 1) * tau + n;
  res.x_bar.assign(covered, 0.0);

  auto absorb = [&](std::vector<Emission>&& batch) {
    for (auto& e : batch) {
      if (!e.contributions.empty()) {
        ++res.jensen_checked;
        if (!jensen_check(e, stream[e.index]).holds) ++res.jensen_violations;
        e.contributions.clear();
        e.contributions.shrink_to_fit();
      }
      res.x_bar[e.index] = e.x_bar;
      res.emissions.push_back(std::move(e));
    }
  };

  std::chrono::duration<double> encode_time{0}, decode_time{0};
  EncoderState state;
  for (std::size_t i = 0; i < W; ++i) {
    const auto t0 = Clock::now();
    Vector y;
    if (opts.encoding == EncodingMode::recursive) {
      if (i == 0) {
        state = encode_first(A, window(stream, 0, n, tau), opts.noise, tau);
      } else {
        const std::size_t prev = (i - 1) * tau;
        encode_step(state, A, stream.subspan(prev, tau), stream.subspan(prev + n, tau));
      }
      y = state.y;
    } else {
      y = encode_direct(A, PermutationOffset(n, (i * tau) % n), window(stream, i, n, tau),
                        opts.noise, i);
    }
    const auto t1 = Clock::now();
    auto batch = pipe.step(y);
    const auto t2 = Clock::now();
    encode_time += t1 - t0;
    decode_time += t2 - t1;
    res.window_seconds.push_back(std::chrono::duration<double>(t2 - t0).count());
    const auto& rep = pipe.last()->report;
    res.iterations.push_back(rep.iterations);
    if (!rep.converged) ++res.unconverged_windows;
    absorb(std::move(batch));
  }
  absorb(pipe.finish());

  const std::span<const double> truth = stream.first(covered);
  ErrorSummary& s = res.summary;
  s.wall_times["encode"] = encode_time;
  s.wall_times["decode"] = decode_time;
  s.mean_iterations = mean_of(res.iterations);
  for (std::size_t i = 0; i < W; ++i) {
    const auto xs = truth.subspan(i * tau, n);
    const auto xb = std::span<const double>(res.x_bar).subspan(i * tau, n);
    try {
      s.ne_per_window.push_back(normalized_error(xb, xs));
    } catch (const UndefinedMetricError&) {
      ++s.skipped_windows;
    }
  }
  // Indices flushed by finish() were never covered by all their windows, so
  // the stream ratio is taken over the range finalized while streaming.
  const std::size_t finalized = W * tau;
  const auto xs = truth.first(finalized);
  const auto xb = std::span<const double>(res.x_bar).first(finalized);
  double energy = 0.0;
  for (double v : xs) energy += v * v;
  if (energy > 0.0) {
    s.stream_nev = stream_nev(xb, xs);
  } else {
    s.stream_nev = squared_error(xb, xs) == 0.0 ? 0.0 : INFINITY;
  }
  std::vector<std::size_t> detected, support;
  for (std::size_t g = 0; g < covered; ++g) {
    if (res.x_bar[g] != 0.0) detected.push_back(g);
    if (truth[g] != 0.0) support.push_back(g);
  }
  if (!support.empty()) {
    const Rates r = tpr_fpr(detected, support, covered);
    s.tpr = r.tpr;
    s.fpr = r.fpr;
  } else {
    s.tpr = 1.0;
    s.fpr = static_cast<double>(detected.size()) / static_cast<double>(covered);
  }
  return res;
}

// ---------------------------------------------------------------- benchmark

BenchResult bench_arms(const BenchOptions& o) {
  BenchResult out;
  out.n = o.n;
  out.m = o.m ? o.m : m_rule_6pn(o.p, o.n);
  out.windows = o.windows;
  const SensingMatrix A = generate(o.ensemble, out.m, o.n, derive_seed(o.seed, {0xbe}));
  StreamConfig sc{o.p, 1.0, 2.0, derive_seed(o.seed, {0x57}), o.n + (o.windows - 1) * o.tau};
  const SparseStream stream = gen_stream(sc);

  StreamRunOptions run;
  run.rcs.n = o.n;
  run.rcs.tau = o.tau;
  run.rcs.lambda = o.lambda > 0.0 ? o.lambda : default_lambda(o.sigma, o.n);
  run.rcs.solver = o.solver;
  run.rcs.solver.lipschitz = spectral_norm_sq(A.base);
  run.rcs.keep_contributions = o.audit_jensen;
  run.noise = {o.sigma, derive_seed(o.seed, {0x40})};

  // Encode cost of one window after the first, measured on the op counter.
  {
    EncoderState st = encode_first(A, window(stream, 0, o.n, o.tau), run.noise, o.tau);
    OpCounter::reset();
    encode_step(st, A, std::span(stream.values).subspan(0, o.tau),
                std::span(stream.values).subspan(o.n, o.tau));
    out.encode_ops_recursive = static_cast<double>(OpCounter::value());
    OpCounter::reset();
    (void)encode_direct(A, PermutationOffset(o.n, o.tau % o.n), window(stream, 1, o.n, o.tau),
                        NoiseModel{}, 1);
    out.encode_ops_direct = static_cast<double>(OpCounter::value());
  }

  run.encoding = EncodingMode::recursive;
  run.rcs.warm_start = true;
  const StreamRunResult warm = run_stream(A, stream.values, run);
  run.encoding = EncodingMode::direct;
  run.rcs.warm_start = false;
  const StreamRunResult cold = run_stream(A, stream.values, run);

  auto mean_d = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  out.recursive_warm_seconds = mean_d(warm.window_seconds);
  out.direct_cold_seconds = mean_d(cold.window_seconds);
  out.speedup = out.direct_cold_seconds / out.recursive_warm_seconds;
  out.warm_iterations = warm.iterations;
  out.cold_iterations = cold.iterations;
  out.warm_mean_iterations = mean_of(warm.iterations);
  out.cold_mean_iterations = mean_of(cold.iterations);
  out.warm_iterations_sd = sd_of(warm.iterations);
  out.cold_iterations_sd = sd_of(cold.iterations);
  out.jensen_checked = warm.jensen_checked + cold.jensen_checked;
  out.jensen_violations = warm.jensen_violations + cold.jensen_violations;
  for (std::size_t g = 0; g < warm.x_bar.size(); ++g)
    out.max_estimate_gap = std::max(out.max_estimate_gap, std::abs(warm.x_bar[g] - cold.x_bar[g]));
  return out;
}

// ------------------------------------------------------- support detection

Vector planted_signal(std::size_t n, std::size_t kappa, double amp_low, double amp_high,
                      std::uint64_t seed) {
  if (kappa > n) throw ConfigError("planted_signal: kappa > n");
  Rng rng = make_rng(seed, {0x91a});
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_real_distribution<double> mag(amp_low, amp_high);
  std::bernoulli_distribution neg(0.5);
  Vector x(n, 0.0);
  for (std::size_t k = 0; k < kappa; ++k) {
    const double v = amp_low == amp_high ? amp_low : mag(rng);
    x[idx[k]] = neg(rng) ? -v : v;
  }
  return x;
}

std::vector<SupportPoint> support_sweep(const SupportSweepOptions& o) {
  const std::size_t M = o.m_values.size();
  const std::size_t X = o.xi1_values.size();
  std::vector<Rates> acc(M * o.trials * X);
  const double lambda = default_lambda(o.sigma, o.n);

  parallel_for(M * o.trials, [&](std::size_t task) {
    const std::size_t mi = task / o.trials;
    const std::size_t trial = task % o.trials;
    const std::size_t m = o.m_values[mi];
    const std::uint64_t s = derive_seed(o.seed, {m, trial});
    const SensingMatrix A = generate(o.ensemble, m, o.n, s);
    const Vector x = planted_signal(o.n, o.kappa, o.amp_low, o.amp_high, derive_seed(s, {1}));
    Vector y = matvec(A.base, x);
    axpy(1.0, noise_draw({o.sigma, derive_seed(s, {2})}, m, 0), y);

    const DenseOperator op(A.base);
    FistaOptions fo = o.solver;
    fo.lipschitz = spectral_norm_sq(A.base);
    const SolverReport rep = fista({op, y, lambda}, Vector(o.n, 0.0), fo);
    std::vector<std::size_t> truth;
    for (std::size_t j = 0; j < o.n; ++j)
      if (x[j] != 0.0) truth.push_back(j);
    for (std::size_t xi = 0; xi < X; ++xi)
      acc[task * X + xi] = tpr_fpr(detect_support_threshold(rep.x_hat, o.xi1_values[xi]), truth, o.n);
  });

  std::vector<SupportPoint> out;
  for (std::size_t mi = 0; mi < M; ++mi) {
    for (std::size_t xi = 0; xi < X; ++xi) {
      SupportPoint pt{o.m_values[mi], o.xi1_values[xi], 0.0, 0.0};
      for (std::size_t t = 0; t < o.trials; ++t) {
        const Rates& r = acc[(mi * o.trials + t) * X + xi];
        pt.tpr += r.tpr;
        pt.fpr += r.fpr;
      }
      pt.tpr /= static_cast<double>(o.trials);
      pt.fpr /= static_cast<double>(o.trials);
      out.push_back(pt);
    }
  }
  return out;
}

// ---------------------------------------------------------------- debiasing

std::vector<DebiasPoint> debias_study(const DebiasOptions& o) {
  const std::size_t m =
      o.m ? o.m
          : static_cast<std::size_t>(
                std::ceil(2.0 * static_cast<double>(o.kappa) * std::log(static_cast<double>(o.n))));
  const double lambda = o.lambda > 0.0 ? o.lambda : default_lambda(o.sigma, o.n);
  const std::size_t k_max = o.k_values.empty()
                                ? 0
                                : *std::max_element(o.k_values.begin(), o.k_values.end());
  const std::size_t P = o.k_values.size();
  std::vector<DebiasPoint> per_seed(o.seeds * P);

  parallel_for(o.seeds, [&](std::size_t sd) {
    const std::uint64_t s = derive_seed(o.seed, {sd});
    const SensingMatrix A = gen_gaussian(m, o.n, s);
    const DenseOperator op(A.base);
    const Vector x = planted_signal(o.n, o.kappa, o.amp_low, o.amp_high, derive_seed(s, {1}));
    const Vector Ax = matvec(A.base, x);
    const NoiseModel noise{o.sigma, derive_seed(s, {2})};
    FistaOptions fo = o.solver;
    fo.lipschitz = spectral_norm_sq(A.base);

    // Repeated measurements of the same window; each solve starts from the
    // previous solution since the underlying signal does not move.
    std::vector<Vector> ys(k_max), lasso(k_max);
    Vector start(o.n, 0.0);
    for (std::size_t k = 0; k < k_max; ++k) {
      ys[k] = Ax;
      axpy(1.0, noise_draw(noise, m, k), ys[k]);
      lasso[k] = fista({op, ys[k], lambda}, start, fo).x_hat;
      start = lasso[k];
    }

    for (std::size_t pi = 0; pi < P; ++pi) {
      const std::size_t K = o.k_values[pi];
      DebiasPoint& pt = per_seed[sd * P + pi];
      pt.k = K;

      Vector avg(o.n, 0.0);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < o.n; ++j) avg[j] += lasso[k][j] / static_cast<double>(K);
      pt.mse_average_only = squared_error(avg, x);

      VoteLedger voting, plain;
      const std::size_t xi2 = (K + 1) / 2;
      for (std::size_t k = 0; k < K; ++k) {
        const auto detected = detect_support_threshold(lasso[k], o.xi1);
        voting.cast_votes(detected, 0);
        const auto R = voting.accepted_support(0, o.n, xi2, m);
        voting.update_averages(lse_on_support(op, ys[k], R), R, 0);

        auto I = detected;
        if (I.size() >= m) {
          std::stable_sort(I.begin(), I.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(lasso[k][a]) > std::abs(lasso[k][b]);
          });
          I.resize(m - 1);
        }
        plain.update_all(lse_on_support(op, ys[k], I), 0);
      }
      Vector xv(o.n), xp(o.n);
      for (std::size_t j = 0; j < o.n; ++j) {
        xv[j] = voting.average(j);
        xp[j] = plain.average(j);
      }
      pt.mse_voting = squared_error(xv, x);
      pt.mse_debias_no_voting = squared_error(xp, x);
    }
  });

  std::vector<DebiasPoint> out(P);
  for (std::size_t pi = 0; pi < P; ++pi) {
    out[pi].k = o.k_values[pi];
    for (std::size_t sd = 0; sd < o.seeds; ++sd) {
      const DebiasPoint& q = per_seed[sd * P + pi];
      out[pi].mse_average_only += q.mse_average_only / static_cast<double>(o.seeds);
      out[pi].mse_voting += q.mse_voting / static_cast<double>(o.seeds);
      out[pi].mse_debias_no_voting += q.mse_debias_no_voting / static_cast<double>(o.seeds);
    }
  }
  return out;
}

// -------------------------------------------------------- streaming error

std::vector<NevPoint> nev_sweep(const NevOptions& o) {
  const std::size_t N = o.n_values.size();
  std::vector<NevPoint> out(N * o.seeds);
  parallel_for(N * o.seeds, [&](std::size_t task) {
    const std::size_t n = o.n_values[task / o.seeds];
    const std::size_t sd = task % o.seeds;
    const std::uint64_t s = derive_seed(o.seed, {sd});
    const std::size_t m = m_rule_5kbar(o.p, n);

    StreamConfig sc{o.p, o.amp_low, o.amp_high, derive_seed(s, {0x57, n}), o.length_factor * n};
    const SparseStream stream = gen_stream(sc);
    const SensingMatrix A = generate(o.ensemble, m, n, derive_seed(s, {0xA, n}));

    StreamRunOptions run;
    run.rcs.n = n;
    run.rcs.tau = o.tau;
    run.rcs.lambda = o.lambda > 0.0 ? o.lambda : o.lambda_scale * default_lambda(o.sigma, n);
    run.rcs.xi1 = o.xi1;
    run.rcs.xi2 = o.xi2;
    if (o.xi2 == 0 && o.xi2_fraction > 0.0)
      run.rcs.xi2 = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(o.xi2_fraction * static_cast<double>(n / o.tau))));
    run.rcs.solver = o.solver;
    run.rcs.keep_contributions = o.audit_jensen;
    run.noise = {o.sigma, derive_seed(s, {0x40, n})};
    const StreamRunResult r = run_stream(A, stream.values, run);

    NevPoint& pt = out[task];
    pt.n = n;
    pt.m = m;
    pt.seed = sd;
    pt.nev = r.summary.stream_nev;
    pt.mean_iterations = r.summary.mean_iterations;
    pt.jensen_checked = r.jensen_checked;
    pt.jensen_violations = r.jensen_violations;
  });
  return out;
}

std::vector<MismatchRow> mismatch_table(std::span<const std::size_t> n_values,
                                        std::span<const double> p_values, double amp) {
  std::vector<MismatchRow> out;
  for (std::size_t n : n_values) {
    for (double p : p_values) {
      const auto kappa = std::min<std::size_t>(
          n, static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-12)));
      out.push_back({n, kappa, p, mismatch_expectation(n, kappa, p, amp)});
    }
  }
  return out;
}

}  // namespace rcs

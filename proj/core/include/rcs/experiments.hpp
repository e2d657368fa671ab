#pragma once

// Experiment harness shared by the CLI and the acceptance suite: full stream
// runs, runtime comparison, support-detection sweeps, the repeated-measurement
// debiasing study and the model-mismatch table.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rcs/decoder.hpp"
#include "rcs/encoder.hpp"
#include "rcs/metrics.hpp"
#include "rcs/sensing.hpp"
#include "rcs/signal.hpp"

namespace rcs {

/// Worker count: RCS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_threads();

/// Runs body(i) for i in [0, count) on at most `threads` workers. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = worker_threads());

enum class EncodingMode { recursive, direct };

struct StreamRunOptions {
  RcsConfig rcs;
  NoiseModel noise;
  EncodingMode encoding = EncodingMode::recursive;
  /// Stop after this many windows (0 = all that fit).
  std::size_t max_windows = 0;
};

struct StreamRunResult {
  std::vector<Emission> emissions;  ///< in global index order, no gaps
  Vector x_bar;                     ///< estimate over the covered prefix
  ErrorSummary summary;
  std::vector<std::size_t> iterations;  ///< FISTA iterations per window
  std::vector<double> window_seconds;   ///< encode + decode wall time per window
  std::size_t unconverged_windows = 0;
  std::size_t jensen_checked = 0;
  std::size_t jensen_violations = 0;
};

/// Encodes the stream window by window and decodes it with RcsPipeline.
/// With rcs.keep_contributions the Jensen inequality is checked on every
/// emitted index that received at least one estimate.
StreamRunResult run_stream(const SensingMatrix& A, std::span<const double> stream,
                           const StreamRunOptions& opts);

/// m = 6 p n, rounded, at least 1.
std::size_t m_rule_6pn(double p, std::size_t n);
/// m = 5 * (expected window sparsity n p), rounded, at least 1.
std::size_t m_rule_5kbar(double p, std::size_t n);

// ---------------------------------------------------------------- benchmark

struct BenchOptions {
  std::size_t n = 1000;
  std::size_t tau = 1;
  double p = 0.05;
  std::size_t m = 0;  ///< 0 = 6 p n
  double sigma = 0.1;
  double lambda = 0.0;  ///< 0 = default_lambda
  Ensemble ensemble = Ensemble::gaussian;
  std::size_t windows = 100;
  std::uint64_t seed = 1;
  FistaOptions solver;
  /// Keep per-window contributions and check the Jensen inequality.
  bool audit_jensen = false;
};

struct BenchResult {
  std::size_t n = 0, m = 0, windows = 0;
  double recursive_warm_seconds = 0.0;  ///< mean per window
  double direct_cold_seconds = 0.0;
  double speedup = 0.0;
  double warm_mean_iterations = 0.0;
  double cold_mean_iterations = 0.0;
  double warm_iterations_sd = 0.0;
  double cold_iterations_sd = 0.0;
  double encode_ops_recursive = 0.0;  ///< multiply-adds per window after the first
  double encode_ops_direct = 0.0;
  double max_estimate_gap = 0.0;  ///< max |x_bar_recursive - x_bar_direct|
  std::size_t jensen_checked = 0, jensen_violations = 0;  ///< both arms
  std::vector<std::size_t> warm_iterations, cold_iterations;
};

/// Recursive encoding + warm start against direct encoding + cold start on the
/// same stream and noise.
BenchResult bench_arms(const BenchOptions& opts);

// ------------------------------------------------------- support detection

struct SupportSweepOptions {
  std::size_t n = 600;
  std::size_t kappa = 6;
  double sigma = 0.1;
  double amp_low = 3.34, amp_high = 4.34;
  std::vector<std::size_t> m_values;
  std::vector<double> xi1_values{0.01, 0.1, 1.0};
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  Ensemble ensemble = Ensemble::gaussian;
  FistaOptions solver;
};

struct SupportPoint {
  std::size_t m = 0;
  double xi1 = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Mean TPR/FPR of thresholded LASSO supports, one point per (m, xi1).
std::vector<SupportPoint> support_sweep(const SupportSweepOptions& opts);

/// Exactly kappa nonzeros at uniformly random positions, magnitudes uniform
/// on [amp_low, amp_high], random signs.
Vector planted_signal(std::size_t n, std::size_t kappa, double amp_low, double amp_high,
                      std::uint64_t seed);

// ---------------------------------------------------------------- debiasing

struct DebiasOptions {
  std::size_t n = 400;
  std::size_t kappa = 20;
  std::size_t m = 0;  ///< 0 = ceil(2 kappa ln n)
  double sigma = 0.1;
  double lambda = 0.0;  ///< 0 = default_lambda
  double xi1 = 0.1;
  double amp_low = 3.34, amp_high = 4.34;
  std::vector<std::size_t> k_values{1, 2, 4, 8, 16, 32, 64};
  std::size_t seeds = 20;
  std::uint64_t seed = 1;
  FistaOptions solver;
};

struct DebiasPoint {
  std::size_t k = 0;
  double mse_average_only = 0.0;
  double mse_voting = 0.0;
  double mse_debias_no_voting = 0.0;
};

/// Fixed window, K independent noisy measurements; squared error of the three
/// combiners averaged over seeds. Voting accepts at ceil(K/2) votes.
std::vector<DebiasPoint> debias_study(const DebiasOptions& opts);

// -------------------------------------------------------- streaming error

struct NevOptions {
  std::vector<std::size_t> n_values{200, 400, 800};
  std::size_t tau = 1;
  double p = 0.05;
  double sigma = 0.1;
  double lambda = 0.0;  ///< 0 = lambda_scale * default_lambda for each n
  double lambda_scale = 1.0;
  double amp_low = 1.0, amp_high = 2.0;
  std::size_t length_factor = 20;  ///< stream length = factor * n
  std::size_t seeds = 1;
  std::uint64_t seed = 1;
  Ensemble ensemble = Ensemble::gaussian;
  double xi1 = 0.1;
  std::size_t xi2 = 0;
  /// With xi2 == 0 and a positive fraction, xi2 = ceil(fraction * floor(n / tau)).
  double xi2_fraction = 0.0;
  FistaOptions solver;
  bool audit_jensen = false;
};

struct NevPoint {
  std::size_t n = 0, m = 0;
  std::uint64_t seed = 0;
  double nev = 0.0;
  double mean_iterations = 0.0;
  std::size_t jensen_checked = 0, jensen_violations = 0;
};

std::vector<NevPoint> nev_sweep(const NevOptions& opts);

// ---------------------------------------------------------------- mismatch

struct MismatchRow {
  std::size_t n = 0, kappa = 0;
  double p = 0.0;
  double expectation = 0.0;
};

/// kappa = ceil(n p) for every (n, p) pair.
std::vector<MismatchRow> mismatch_table(std::span<const std::size_t> n_values,
                                        std::span<const double> p_values, double amp);

}  // namespace rcs

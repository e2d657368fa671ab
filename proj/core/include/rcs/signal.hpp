#pragma once

// Synthetic sparse streams and the sparsity model-mismatch expectation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcs/numkernel.hpp"

namespace rcs {

/// Each entry is zero with probability 1-p; otherwise its magnitude is
/// uniform on [amp_low, amp_high] with an equiprobable sign.
struct StreamConfig {
  double p = 0.05;
  double amp_low = 1.0;
  double amp_high = 2.0;
  std::uint64_t seed = 0;
  std::size_t length = 0;

  /// Throws ConfigError unless 0 < p <= 1 and 0 <= amp_low <= amp_high.
  void validate() const;
};

struct SparseStream {
  std::vector<double> values;
  StreamConfig config;

  std::size_t size() const noexcept { return values.size(); }
};

SparseStream gen_stream(const StreamConfig& cfg);

/// Window i of length n with step tau: [x_{i*tau}, ..., x_{i*tau+n-1}].
Vector window(std::span<const double> stream, std::size_t i, std::size_t n, std::size_t tau = 1);
inline Vector window(const SparseStream& s, std::size_t i, std::size_t n, std::size_t tau = 1) {
  return window(std::span<const double>(s.values), i, n, tau);
}

/// Number of windows of length n and step tau that fit in a stream of the
/// given length.
std::size_t window_count(std::size_t length, std::size_t n, std::size_t tau);

/// Closed-form E||X - X_kappa||_1 for X with i.i.d. entries that are zero
/// w.p. 1-p and uniform on [-amp, amp] otherwise; X_kappa keeps the kappa
/// largest magnitudes.
double mismatch_expectation(std::size_t n, std::size_t kappa, double p, double amp);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

/// Empirical ||X - X_kappa||_1 averaged over i.i.d. draws of the same model.
MonteCarloEstimate mismatch_mc(std::size_t n, std::size_t kappa, double p, double amp,
                               std::size_t trials, std::uint64_t seed);

}  // namespace rcs

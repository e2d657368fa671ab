#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcs/decoder.hpp"
#include "rcs/numkernel.hpp"

namespace rcs {

/// ||x_bar - x||_2 / ||x||_2. Throws UndefinedMetricError if x is all zero.
double normalized_error(std::span<const double> x_bar, std::span<const double> x_true);

/// sum (x_bar_i - x_i)^2 / sum x_i^2 over the whole range.
double stream_nev(std::span<const double> x_bar, std::span<const double> x_true);

struct Rates {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// TPR = |detected & truth| / |truth|; FPR = |detected \ truth| / (n - |truth|).
/// Throws UndefinedMetricError when truth is empty.
Rates tpr_fpr(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
              std::size_t n);

/// Samples taken per recovered entry after i windows: i m / (n + (i-1) tau).
double sampling_efficiency(std::size_t m, std::size_t n, std::size_t tau, std::size_t i);
/// i -> infinity limit for independently sampled windows: m / tau.
double sampling_efficiency_limit(std::size_t m, std::size_t tau);
/// Efficiency when only tau parameters are stored per window:
/// (m + (i-1) tau) / (n + (i-1) tau), tending to 1.
double sampling_efficiency_recursive(std::size_t m, std::size_t n, std::size_t tau, std::size_t i);

/// Averaging can only reduce squared error: (x_bar - x)^2 <= mean_k (c_k - x)^2,
/// checked on an emission carrying its contributions. Both sides are reported.
struct JensenCheck {
  double averaged_sq_error = 0.0;
  double mean_sq_error = 0.0;
  bool holds = true;
};
JensenCheck jensen_check(const Emission& e, double x_true);

struct ErrorSummary {
  std::vector<double> ne_per_window;
  std::size_t skipped_windows = 0;  ///< windows with all-zero truth
  double stream_nev = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double mean_iterations = 0.0;
  std::map<std::string, std::chrono::duration<double>> wall_times;

  double mean_ne() const;
};

/// Row of the summary CSV: experiment_id,n,tau,m,sigma,seed,metric_name,value
struct SummaryRow {
  std::string experiment_id;
  std::size_t n = 0;
  std::size_t tau = 0;
  std::size_t m = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SummaryRow& row);

}  // namespace rcs

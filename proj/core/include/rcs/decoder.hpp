#pragma once

// Streaming decoder: per-window LASSO, support voting, least-squares
// debiasing on the accepted support, and running averages over every window
// that covers a stream entry.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcs/errors.hpp"
#include "rcs/numkernel.hpp"
#include "rcs/sensing.hpp"
#include "rcs/solvers.hpp"

namespace rcs {

enum class WarmTailPolicy { zeros, hold };
enum class Detector { threshold, annihilate_topk };

/// How per-window estimates are combined into the stream estimate.
enum class Combiner {
  voting,            ///< threshold votes, accept at xi2, LSE on accepted set, average
  average_only,      ///< average raw LASSO outputs over all covering windows
  debias_no_voting,  ///< LSE on each window's own detected support, average all
};

std::string_view to_string(Combiner c);
Combiner parse_combiner(std::string_view name);
Detector parse_detector(std::string_view name);
WarmTailPolicy parse_warm_tail(std::string_view name);

/// lambda = 4 sigma sqrt(2 log n)
double default_lambda(double sigma, std::size_t n);

struct RcsConfig {
  std::size_t n = 0;
  std::size_t tau = 1;
  double lambda = 0.0;
  double xi1 = 0.1;
  /// Vote acceptance threshold. 0 selects ceil(n / (2 tau)).
  std::size_t xi2 = 0;
  std::size_t xi3 = 1;
  WarmTailPolicy warm_tail = WarmTailPolicy::zeros;
  Detector detector = Detector::threshold;
  Combiner combiner = Combiner::voting;
  bool warm_start = true;
  /// Keep every per-window contribution so callers can audit the averages.
  bool keep_contributions = false;
  FistaOptions solver;

  /// Windows covering an interior entry: floor(n / tau).
  std::size_t coverage() const noexcept { return tau ? n / tau : 0; }
  std::size_t effective_xi2() const noexcept;
  void validate() const;
};

struct Emission {
  std::size_t index = 0;  ///< global stream index
  double x_bar = 0.0;
  std::uint32_t votes = 0;
  std::uint32_t recoveries = 0;
  std::uint64_t finalized_at_window = 0;
  std::vector<double> contributions;  ///< filled only with keep_contributions
};

/// Per-index votes, recovery counts and running means over the live horizon.
/// Indices before the horizon are finalized and no longer stored.
class VoteLedger {
 public:
  explicit VoteLedger(bool keep_contributions = false) : keep_(keep_contributions) {}

  /// First live global index.
  std::size_t horizon_begin() const noexcept { return base_; }
  std::size_t horizon_end() const noexcept { return base_ + entries_.size(); }

  std::uint32_t votes(std::size_t g) const;
  std::uint32_t recoveries(std::size_t g) const;
  double average(std::size_t g) const;

  /// v[window_start + j] += 1 for each j in support.
  void cast_votes(std::span<const std::size_t> support, std::size_t window_start);

  /// Window-relative indices j < n with votes >= xi2, in index order. If m or
  /// more qualify, returns the m-1 with the most votes instead, highest first
  /// (ties to the lower index).
  ///
  /// With tau > 0 the threshold for a head index g (one covered by fewer than
  /// C = n/tau windows over the whole stream) is scaled to its actual
  /// coverage: max(1, ceil(xi2 * (g/tau + 1) / C)).
  std::vector<std::size_t> accepted_support(std::size_t window_start, std::size_t n, std::size_t xi2,
                                            std::size_t m, std::size_t tau = 0) const;

  /// Running mean update for j in support: l += 1, x_bar += (x[j] - x_bar)/l.
  void update_averages(std::span<const double> x_tilde, std::span<const std::size_t> support,
                       std::size_t window_start);
  /// Same update for every j in the window.
  void update_all(std::span<const double> x, std::size_t window_start);

  /// Removes and returns every live index < end, in index order.
  std::vector<Emission> finalize_before(std::size_t end, std::uint64_t window);

 private:
  struct Entry {
    std::uint32_t votes = 0;
    std::uint32_t recoveries = 0;
    double mean = 0.0;
    std::vector<double> contributions;
  };

  Entry& at(std::size_t g);
  const Entry& at(std::size_t g) const;
  void record(Entry& e, double value);

  bool keep_;
  std::size_t base_ = 0;
  std::deque<Entry> entries_;
};

/// Previous estimate shifted left by tau; the trailing tau entries are zero
/// (zeros) or repeat the last value (hold).
Vector warm_start(std::span<const double> prev, std::size_t tau, WarmTailPolicy policy);

/// {j : |x_hat_j| >= xi1}
std::vector<std::size_t> detect_support_threshold(std::span<const double> x_hat, double xi1);

struct AnnihilationResult {
  std::vector<std::size_t> support;  ///< sorted
  SolverReport residual_report;      ///< LASSO on y - A x_warm
  bool skipped_topk = false;         ///< residual estimate numerically zero
};

/// LASSO on the annihilated measurement y - A x_warm; returns the xi3
/// largest-magnitude indices of that estimate united with supp(x_warm).
AnnihilationResult detect_support_annihilate(std::span<const double> y, const LinearOperator& A,
                                             std::span<const double> x_warm, double lambda,
                                             std::size_t xi3, const FistaOptions& opts = {});

struct WindowEstimate {
  std::uint64_t window = 0;
  Vector lasso;                       ///< x_hat(i)
  Vector debiased;                    ///< x_tilde(i), zero off `support`
  std::vector<std::size_t> detected;  ///< I_hat(i)
  std::vector<std::size_t> support;   ///< indices used in the LSE (R_i)
  SolverReport report;
};

/// Solver or LSE failure, tagged with the window where it happened.
class WindowError : public Error {
 public:
  WindowError(std::uint64_t window, const std::string& what)
      : Error("window " + std::to_string(window) + ": " + what), window_(window) {}
  std::uint64_t window() const noexcept { return window_; }

 private:
  std::uint64_t window_;
};

/// Sequential decoder for one stream. Feed y(i) for i = 0, 1, ... in order.
class RcsPipeline {
 public:
  RcsPipeline(const SensingMatrix& A, RcsConfig cfg);

  /// Decodes the next window; returns the indices no later window covers.
  std::vector<Emission> step(std::span<const double> y);
  /// Finalizes everything still live (end of stream).
  std::vector<Emission> finish();

  const RcsConfig& config() const noexcept { return cfg_; }
  const VoteLedger& ledger() const noexcept { return ledger_; }
  std::uint64_t windows_processed() const noexcept { return next_window_; }
  const std::optional<WindowEstimate>& last() const noexcept { return last_; }
  double lipschitz() const noexcept { return lipschitz_; }

 private:
  const SensingMatrix* A_;
  RcsConfig cfg_;
  double lipschitz_;
  VoteLedger ledger_;
  std::uint64_t next_window_ = 0;
  std::optional<WindowEstimate> last_;
};

struct WindowMeasurement {
  PermutationOffset offset;
  Vector y;
};

struct JointEstimate {
  Vector joint;    ///< the n + (T-1) tau shared unknowns, oldest first
  Vector current;  ///< last n entries: the newest window's estimate
  SolverReport report;
};

/// Minimizes sum_k rho^(T-1-k) (||A(k) x(k) - y(k)||^2 + lambda ||x(k)||_1)
/// over the entries shared by T consecutive windows (oldest first, step tau).
/// Solved as one weighted LASSO. Throws ConfigError when the stacked design
/// would exceed max_entries doubles.
JointEstimate forgetting_joint_estimate(const SensingMatrix& A,
                                        std::span<const WindowMeasurement> windows,
                                        std::size_t tau, double rho, double lambda,
                                        const FistaOptions& opts = {},
                                        std::size_t max_entries = 50'000'000);

}  // namespace rcs

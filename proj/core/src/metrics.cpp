#include "rcs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rcs/errors.hpp"
#include "rcs/io.hpp"

namespace rcs {

double normalized_error(std::span<const double> x_bar, std::span<const double> x_true) {
  if (x_bar.size() != x_true.size()) throw DimensionError("normalized_error: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x_true.size(); ++i) {
    const double d = x_bar[i] - x_true[i];
    num += d * d;
    den += x_true[i] * x_true[i];
  }
  if (den == 0.0) throw UndefinedMetricError("normalized_error: zero-norm truth");
  return std::sqrt(num / den);
}

double stream_nev(std::span<const double> x_bar, std::span<const double> x_true) {
  if (x_bar.size() != x_true.size()) throw DimensionError("stream_nev: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x_true.size(); ++i) {
    const double d = x_bar[i] - x_true[i];
    num += d * d;
    den += x_true[i] * x_true[i];
  }
  if (den == 0.0) throw UndefinedMetricError("stream_nev: zero signal energy");
  return num / den;
}

Rates tpr_fpr(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
              std::size_t n) {
  if (truth.empty()) throw UndefinedMetricError("tpr_fpr: empty true support");
  std::vector<bool> in_truth(n, false), seen(n, false);
  for (std::size_t t : truth) {
    if (t >= n) throw BoundsError("tpr_fpr: true index out of range");
    in_truth[t] = true;
  }
  std::size_t tp = 0, fp = 0;
  for (std::size_t d : detected) {
    if (d >= n) throw BoundsError("tpr_fpr: detected index out of range");
    if (seen[d]) continue;
    seen[d] = true;
    (in_truth[d] ? tp : fp) += 1;
  }
  const auto k = static_cast<std::size_t>(std::count(in_truth.begin(), in_truth.end(), true));
  Rates r;
  r.tpr = static_cast<double>(tp) / static_cast<double>(k);
  r.fpr = n > k ? static_cast<double>(fp) / static_cast<double>(n - k) : 0.0;
  return r;
}

double sampling_efficiency(std::size_t m, std::size_t n, std::size_t tau, std::size_t i) {
  if (i < 1) throw ConfigError("sampling_efficiency: i must be >= 1");
  return static_cast<double>(i) * static_cast<double>(m) /
         (static_cast<double>(n) + static_cast<double>(i - 1) * static_cast<double>(tau));
}

double sampling_efficiency_limit(std::size_t m, std::size_t tau) {
  return static_cast<double>(m) / static_cast<double>(tau);
}

double sampling_efficiency_recursive(std::size_t m, std::size_t n, std::size_t tau, std::size_t i) {
  if (i < 1) throw ConfigError("sampling_efficiency: i must be >= 1");
  const double extra = static_cast<double>(i - 1) * static_cast<double>(tau);
  return (static_cast<double>(m) + extra) / (static_cast<double>(n) + extra);
}

JensenCheck jensen_check(const Emission& e, double x_true) {
  JensenCheck out;
  if (e.contributions.empty()) return out;
  const double d = e.x_bar - x_true;
  out.averaged_sq_error = d * d;
  double s = 0.0;
  for (double c : e.contributions) s += (c - x_true) * (c - x_true);
  out.mean_sq_error = s / static_cast<double>(e.contributions.size());
  // mean (c-x)^2 - (xbar-x)^2 = mean (c-xbar)^2 + 2 (xbar-x) mean (c-xbar),
  // evaluated directly so the sign is not lost to cancellation.
  double spread = 0.0, drift = 0.0;
  for (double c : e.contributions) {
    spread += (c - e.x_bar) * (c - e.x_bar);
    drift += c - e.x_bar;
  }
  const double k = static_cast<double>(e.contributions.size());
  out.holds = spread / k + 2.0 * d * (drift / k) >= 0.0;
  return out;
}

double ErrorSummary::mean_ne() const {
  if (ne_per_window.empty()) return 0.0;
  double s = 0.0;
  for (double v : ne_per_window) s += v;
  return s / static_cast<double>(ne_per_window.size());
}

void write_summary_header(std::ostream& out) {
  out << "experiment_id,n,tau,m,sigma,seed,metric_name,value\n";
}

void write_summary_row(std::ostream& out, const SummaryRow& r) {
  out << r.experiment_id << ',' << r.n << ',' << r.tau << ',' << r.m << ',' << format_real(r.sigma)
      << ',' << r.seed << ',' << r.metric << ',' << format_real(r.value) << '\n';
}

}  // namespace rcs

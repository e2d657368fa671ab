#include "rcs/signal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rcs/errors.hpp"
#include "rcs/random.hpp"

namespace rcs {

void StreamConfig::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("stream: p must lie in (0, 1]");
  if (!(amp_low >= 0.0 && amp_low <= amp_high) || !std::isfinite(amp_high))
    throw ConfigError("stream: need 0 <= amp_low <= amp_high < inf");
}

SparseStream gen_stream(const StreamConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, {0x57ea4});
  std::bernoulli_distribution nonzero(cfg.p);
  std::bernoulli_distribution negative(0.5);
  std::uniform_real_distribution<double> magnitude(cfg.amp_low, cfg.amp_high);

  SparseStream s{std::vector<double>(cfg.length, 0.0), cfg};
  for (auto& v : s.values) {
    if (!nonzero(rng)) continue;
    const double mag = cfg.amp_low == cfg.amp_high ? cfg.amp_low : magnitude(rng);
    v = negative(rng) ? -mag : mag;
  }
  return s;
}

Vector window(std::span<const double> stream, std::size_t i, std::size_t n, std::size_t tau) {
  if (n == 0 || tau == 0) throw ConfigError("window: n and tau must be >= 1");
  const std::size_t start = i * tau;
  if (start + n > stream.size()) throw BoundsError("window: extends past end of stream");
  return Vector(stream.begin() + static_cast<std::ptrdiff_t>(start),
                stream.begin() + static_cast<std::ptrdiff_t>(start + n));
}

std::size_t window_count(std::size_t length, std::size_t n, std::size_t tau) {
  if (n == 0 || tau == 0) throw ConfigError("window_count: n and tau must be >= 1");
  return length < n ? 0 : (length - n) / tau + 1;
}

double mismatch_expectation(std::size_t n, std::size_t kappa, double p, double amp) {
  if (kappa > n) throw ConfigError("mismatch_expectation: kappa > n");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("mismatch_expectation: p must lie in (0, 1]");
  if (kappa == n) return 0.0;

  const double log_p = std::log(p);
  const double log_q = p < 1.0 ? std::log1p(-p) : -INFINITY;
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  const double kk = static_cast<double>(kappa);

  double total = 0.0;
  for (std::size_t k = kappa + 1; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    const double rest = static_cast<double>(n - k);
    double log_w = lg_n1 - std::lgamma(kd + 1.0) - std::lgamma(rest + 1.0) + kd * log_p;
    if (n > k) log_w += rest * log_q;
    const double w = std::exp(log_w);
    if (w == 0.0) continue;
    // sum_{i=kappa+1}^{k} (1 - i/(k+1))
    const double sum_i = (kd - kk) - ((kd * (kd + 1.0) - kk * (kk + 1.0)) / 2.0) / (kd + 1.0);
    total += w * sum_i;
  }
  return amp * total;
}

MonteCarloEstimate mismatch_mc(std::size_t n, std::size_t kappa, double p, double amp,
                               std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ConfigError("mismatch_mc: trials must be >= 1");
  if (kappa > n) throw ConfigError("mismatch_mc: kappa > n");
  MonteCarloEstimate est{0.0, 0.0, trials};
  if (kappa == n) return est;

  Rng rng = make_rng(seed, {0x3c});
  std::bernoulli_distribution nonzero(std::clamp(p, 0.0, 1.0));
  std::uniform_real_distribution<double> value(-amp, amp);
  std::vector<double> mags;
  mags.reserve(n);

  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    mags.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (nonzero(rng)) mags.push_back(std::abs(value(rng)));
    double tail = 0.0;
    if (mags.size() > kappa) {
      std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(kappa), mags.end(),
                       std::greater<>());
      for (std::size_t i = kappa; i < mags.size(); ++i) tail += mags[i];
    }
    const double delta = tail - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (tail - mean);
  }
  est.mean = mean;
  if (trials > 1)
    est.std_error = std::sqrt(m2 / static_cast<double>(trials - 1) / static_cast<double>(trials));
  return est;
}

}  // namespace rcs

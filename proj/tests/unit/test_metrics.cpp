#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rcs/errors.hpp"
#include "rcs/metrics.hpp"
#include "test_util.hpp"

using namespace rcs;

TEST(NormalizedError, Examples) {
  EXPECT_DOUBLE_EQ(normalized_error(Vector{3, 4}, Vector{3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(normalized_error(Vector{0, 0}, Vector{3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(normalized_error(Vector{6, 8}, Vector{3, 4}), 1.0);
  EXPECT_THROW(normalized_error(Vector{1, 0}, Vector{0, 0}), UndefinedMetricError);
  EXPECT_THROW(normalized_error(Vector{1}, Vector{0, 1}), DimensionError);
}

TEST(StreamNev, Examples) {
  EXPECT_DOUBLE_EQ(stream_nev(Vector{1, 0, 2}, Vector{0, 0, 2}), 0.25);
  EXPECT_DOUBLE_EQ(stream_nev(Vector{0, 0, 2}, Vector{1, 0, 2}), 1.0 / 5.0);
  EXPECT_THROW(stream_nev(Vector{1}, Vector{0}), UndefinedMetricError);
}

TEST(StreamNev, ScaleInvariant) {
  const Vector a = test::random_vector(50, 1), b = test::random_vector(50, 2);
  Vector a3 = a, b3 = b;
  for (auto& v : a3) v *= 3;
  for (auto& v : b3) v *= 3;
  EXPECT_NEAR(stream_nev(a, b), stream_nev(a3, b3), 1e-12);
}

TEST(TprFpr, Examples) {
  using Idx = std::vector<std::size_t>;
  Rates r = tpr_fpr(Idx{1, 2, 5}, Idx{1, 2, 3}, 10);
  EXPECT_DOUBLE_EQ(r.tpr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.fpr, 1.0 / 7.0);
  r = tpr_fpr(Idx{}, Idx{0}, 4);
  EXPECT_EQ(r.tpr, 0.0);
  EXPECT_EQ(r.fpr, 0.0);
  r = tpr_fpr(Idx{0, 1, 2, 3}, Idx{0}, 4);
  EXPECT_EQ(r.tpr, 1.0);
  EXPECT_EQ(r.fpr, 1.0);
  r = tpr_fpr(Idx{1, 1, 1}, Idx{1}, 3);
  EXPECT_EQ(r.tpr, 1.0);
  EXPECT_THROW(tpr_fpr(Idx{1}, Idx{}, 3), UndefinedMetricError);
  EXPECT_THROW(tpr_fpr(Idx{5}, Idx{1}, 3), BoundsError);
}

TEST(SamplingEfficiency, ExamplesAndLimits) {
  EXPECT_DOUBLE_EQ(sampling_efficiency(30, 100, 1, 1), 0.3);
  EXPECT_DOUBLE_EQ(sampling_efficiency(30, 100, 10, 11), 330.0 / 200.0);
  EXPECT_DOUBLE_EQ(sampling_efficiency_limit(30, 10), 3.0);
  EXPECT_NEAR(sampling_efficiency(30, 100, 10, 10'000'000), 3.0, 1e-5);
  EXPECT_DOUBLE_EQ(sampling_efficiency_recursive(30, 100, 10, 1), 0.3);
  EXPECT_NEAR(sampling_efficiency_recursive(30, 100, 10, 10'000'000), 1.0, 1e-5);
  double prev = 0.0;
  for (std::size_t i = 1; i < 100; ++i) {
    const double e = sampling_efficiency_recursive(30, 100, 5, i);
    EXPECT_GT(e, prev);
    EXPECT_LT(e, 1.0);
    prev = e;
  }
  EXPECT_THROW(sampling_efficiency(1, 2, 1, 0), ConfigError);
}

TEST(Jensen, HoldsOnRandomContributions) {
  for (std::uint64_t s = 0; s < 500; ++s) {
    const Vector c = test::random_vector(1 + s % 40, s, 1.0 + s % 7);
    Emission e;
    double mean = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) mean += (c[k] - mean) / static_cast<double>(k + 1);
    e.x_bar = mean;
    e.contributions = c;
    const double truth = test::random_vector(1, 1000 + s)[0];
    const JensenCheck j = jensen_check(e, truth);
    EXPECT_TRUE(j.holds);
    EXPECT_LE(j.averaged_sq_error, j.mean_sq_error * (1 + 1e-12));
  }
}

TEST(Jensen, EqualContributionsAreTight) {
  for (double c : {0.1, -3.7, 1e-300, 12345.678}) {
    Emission e;
    double mean = 0.0;
    for (std::size_t k = 0; k < 9; ++k) {
      e.contributions.push_back(c);
      mean += (c - mean) / static_cast<double>(k + 1);
    }
    e.x_bar = mean;
    const JensenCheck j = jensen_check(e, 0.3);
    EXPECT_TRUE(j.holds);
  }
}

TEST(Jensen, DetectsAViolation) {
  Emission e;
  e.x_bar = 5.0;
  e.contributions = {1.0, 1.0};
  EXPECT_FALSE(jensen_check(e, 1.0).holds);
  Emission empty;
  EXPECT_TRUE(jensen_check(empty, 3.0).holds);
}

TEST(ErrorSummary, MeanNe) {
  ErrorSummary s;
  EXPECT_EQ(s.mean_ne(), 0.0);
  s.ne_per_window = {0.1, 0.3};
  EXPECT_DOUBLE_EQ(s.mean_ne(), 0.2);
}

TEST(SummaryCsv, HeaderAndRowRoundTrip) {
  std::ostringstream out;
  write_summary_header(out);
  write_summary_row(out, {"run", 600, 1, 180, 0.1, 7, "stream_nev", 0.123456789012345});
  EXPECT_EQ(out.str(),
            "experiment_id,n,tau,m,sigma,seed,metric_name,value\n"
            "run,600,1,180,0.1,7,stream_nev,0.123456789012345\n");
}

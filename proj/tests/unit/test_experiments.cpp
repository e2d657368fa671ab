#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "rcs/errors.hpp"
#include "rcs/experiments.hpp"

using namespace rcs;

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, [](std::size_t) { FAIL(); }, 4);
}

TEST(ParallelFor, RethrowsTaskException) {
  EXPECT_THROW(parallel_for(
                   50, [](std::size_t i) {
                     if (i == 17) throw std::runtime_error("boom");
                   },
                   3),
               std::runtime_error);
}

TEST(MRules, Examples) {
  EXPECT_EQ(m_rule_6pn(0.05, 600), 180u);
  EXPECT_EQ(m_rule_5kbar(0.05, 800), 200u);
  EXPECT_EQ(m_rule_5kbar(0.001, 10), 1u);
}

TEST(PlantedSignal, ExactSparsityAndBand) {
  const Vector x = planted_signal(600, 6, 3.34, 4.34, 9);
  std::size_t k = 0;
  for (double v : x) {
    if (v == 0.0) continue;
    ++k;
    EXPECT_GE(std::abs(v), 3.34);
    EXPECT_LE(std::abs(v), 4.34);
  }
  EXPECT_EQ(k, 6u);
  EXPECT_EQ(planted_signal(600, 6, 3.34, 4.34, 9), x);
}

TEST(RunStream, DeterministicAndAudited) {
  const std::size_t n = 60;
  const SensingMatrix A = gen_gaussian(20, n, 2);
  const SparseStream s = gen_stream({0.05, 1.0, 2.0, 5, 600});
  StreamRunOptions o;
  o.rcs.n = n;
  o.rcs.tau = 3;
  o.rcs.lambda = default_lambda(0.1, n);
  o.rcs.keep_contributions = true;
  o.noise = {0.1, 4};
  const StreamRunResult a = run_stream(A, s.values, o);
  const StreamRunResult b = run_stream(A, s.values, o);
  EXPECT_EQ(a.x_bar, b.x_bar);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.iterations.size(), window_count(600, n, 3));
  EXPECT_EQ(a.x_bar.size(), 600u);
  EXPECT_GT(a.jensen_checked, 0u);
  EXPECT_EQ(a.jensen_violations, 0u);
  EXPECT_EQ(a.emissions.size(), a.x_bar.size());
  for (std::size_t g = 0; g < a.emissions.size(); ++g) EXPECT_EQ(a.emissions[g].index, g);
  EXPECT_GE(a.summary.stream_nev, 0.0);
  EXPECT_EQ(a.summary.ne_per_window.size() + a.summary.skipped_windows, a.iterations.size());
}

TEST(RunStream, MaxWindowsAndShortStream) {
  const std::size_t n = 30;
  const SensingMatrix A = gen_gaussian(10, n, 2);
  const SparseStream s = gen_stream({0.1, 1.0, 2.0, 5, 200});
  StreamRunOptions o;
  o.rcs.n = n;
  o.rcs.lambda = 0.1;
  o.max_windows = 7;
  EXPECT_EQ(run_stream(A, s.values, o).iterations.size(), 7u);
  const std::vector<double> tiny(10, 1.0);
  EXPECT_THROW(run_stream(A, tiny, o), Error);
}

TEST(BenchArms, SmallRunIsConsistent) {
  BenchOptions o;
  o.n = 100;
  o.windows = 20;
  const BenchResult r = bench_arms(o);
  EXPECT_EQ(r.m, 30u);
  EXPECT_EQ(r.warm_iterations.size(), r.cold_iterations.size());
  EXPECT_DOUBLE_EQ(r.encode_ops_recursive, 30.0);
  EXPECT_DOUBLE_EQ(r.encode_ops_direct, 3000.0);
  EXPECT_LE(r.max_estimate_gap, 1e-4);
  EXPECT_GT(r.speedup, 0.0);
}

TEST(SupportSweep, ShapeAndOrdering) {
  SupportSweepOptions o;
  o.n = 200;
  o.kappa = 4;
  o.m_values = {40, 80};
  o.trials = 4;
  const auto pts = support_sweep(o);
  ASSERT_EQ(pts.size(), 6u);
  for (std::size_t i = 0; i < pts.size(); i += 3) {
    EXPECT_GE(pts[i].fpr, pts[i + 1].fpr);
    EXPECT_GE(pts[i + 1].fpr, pts[i + 2].fpr);
    EXPECT_GE(pts[i].tpr, pts[i + 2].tpr);
  }
}

TEST(DebiasStudy, VotingImprovesWithRepeats) {
  DebiasOptions o;
  o.n = 100;
  o.kappa = 5;
  o.k_values = {1, 16};
  o.seeds = 3;
  const auto pts = debias_study(o);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_LT(pts[1].mse_voting, pts[0].mse_voting);
  EXPECT_LT(pts[1].mse_voting, pts[1].mse_average_only);
}

TEST(MismatchTable, KappaRule) {
  const std::vector<std::size_t> ns{20, 100};
  const std::vector<double> ps{0.05, 0.2};
  const auto rows = mismatch_table(ns, ps, 1.0);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].kappa, 1u);
  EXPECT_EQ(rows[1].kappa, 4u);
  EXPECT_EQ(rows[3].kappa, 20u);
  for (const auto& r : rows)
    EXPECT_DOUBLE_EQ(r.expectation, mismatch_expectation(r.n, r.kappa, r.p, 1.0));
}

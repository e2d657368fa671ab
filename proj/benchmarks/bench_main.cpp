#include <benchmark/benchmark.h>

#include "rcs/decoder.hpp"
#include "rcs/encoder.hpp"
#include "rcs/signal.hpp"
#include "rcs/solvers.hpp"

using namespace rcs;

namespace {

constexpr double kP = 0.05;

std::size_t m_for(std::size_t n) { return static_cast<std::size_t>(6 * kP * static_cast<double>(n)); }

void BM_EncodeStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SensingMatrix A = gen_gaussian(m_for(n), n, 1);
  const SparseStream s = gen_stream({kP, 1.0, 2.0, 2, 2 * n});
  EncoderState st = encode_first(A, window(s, 0, n, 1), {0.1, 3});
  std::size_t i = 0;
  for (auto _ : state) {
    const std::span<const double> v(s.values);
    encode_step(st, A, v.subspan(i, 1), v.subspan(i + n, 1));
    i = (i + 1) % n;
    benchmark::DoNotOptimize(st.y.data());
  }
}

void BM_EncodeDirect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SensingMatrix A = gen_gaussian(m_for(n), n, 1);
  const SparseStream s = gen_stream({kP, 1.0, 2.0, 2, 2 * n});
  std::size_t i = 0;
  for (auto _ : state) {
    const Vector y = encode_direct(A, PermutationOffset(n, i), window(s, i, n, 1), {0.1, 3}, i);
    benchmark::DoNotOptimize(y.data());
    i = (i + 1) % n;
  }
}

// Solve window 1 from a warm start (shifted window-0 estimate) or from zero.
void BM_Fista(benchmark::State& state, bool warm) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SensingMatrix A = gen_gaussian(m_for(n), n, 1);
  const SparseStream s = gen_stream({kP, 1.0, 2.0, 2, n + 1});
  const double lambda = default_lambda(0.1, n);
  FistaOptions o;
  o.lipschitz = spectral_norm_sq(A.base);
  const Vector y0 = encode_direct(A, PermutationOffset(n, 0), window(s, 0, n, 1), {0.1, 3}, 0);
  const Vector y1 = encode_direct(A, PermutationOffset(n, 1), window(s, 1, n, 1), {0.1, 3}, 1);
  const Vector x0 = fista({RotatedView(A, PermutationOffset(n, 0)), y0, lambda}, Vector(n, 0.0), o).x_hat;
  const Vector start = warm ? warm_start(x0, 1, WarmTailPolicy::zeros) : Vector(n, 0.0);
  const RotatedView view(A, PermutationOffset(n, 1));
  std::size_t iters = 0;
  for (auto _ : state) {
    const SolverReport r = fista({view, y1, lambda}, start, o);
    iters = r.iterations;
    benchmark::DoNotOptimize(r.x_hat.data());
  }
  state.counters["iterations"] = static_cast<double>(iters);
}

}  // namespace

BENCHMARK(BM_EncodeStep)->Arg(200)->Arg(600)->Arg(1000);
BENCHMARK(BM_EncodeDirect)->Arg(200)->Arg(600)->Arg(1000);
BENCHMARK_CAPTURE(BM_Fista, warm, true)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fista, cold, false)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "omlab/operators.hpp"

namespace {

omlab::GridFunction band(const omlab::Grid& g) {
  omlab::GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = std::numbers::pi * g.point(i)[0];
    f[i] = std::sin(x) + 0.5 * std::cos(3 * x);
  }
  return f;
}

void BM_HilbertQuadrature(benchmark::State& state) {
  const omlab::Grid g(1, static_cast<int>(state.range(0)), 1.0, omlab::Boundary::Periodic);
  const auto f = band(g);
  const auto K = omlab::hilbert_kernel(g);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::cz_apply(f, K).output);
  state.SetComplexityN(state.range(0));
}

void BM_HilbertFft(benchmark::State& state) {
  const omlab::Grid g(1, static_cast<int>(state.range(0)), 1.0, omlab::Boundary::Periodic);
  const auto f = band(g);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::hilbert_fft(f).output);
  state.SetComplexityN(state.range(0));
}

void BM_Riesz2D(benchmark::State& state) {
  const omlab::Grid g(2, static_cast<int>(state.range(0)), 1.0);
  const auto f = band(g);
  const auto K = omlab::riesz_kernel(1);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::cz_apply(f, K).output);
}

void BM_CzGlobal(benchmark::State& state) {
  const omlab::Grid g(1, static_cast<int>(state.range(0)), 1.0);
  const auto f = band(g);
  const auto K = omlab::hilbert_kernel(g);
  const auto b = omlab::centered_ball(g, f.size() / 3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::cz_global(f, K, b));
}

}  // namespace

BENCHMARK(BM_HilbertQuadrature)->RangeMultiplier(2)->Range(512, 8192)->Complexity();
BENCHMARK(BM_HilbertFft)->RangeMultiplier(2)->Range(512, 8192)->Complexity();
BENCHMARK(BM_Riesz2D)->Arg(64)->Arg(128);
BENCHMARK(BM_CzGlobal)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();

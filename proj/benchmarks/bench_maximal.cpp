#include <benchmark/benchmark.h>

#include <random>

#include "omlab/operators.hpp"

namespace {

omlab::GridFunction noise(const omlab::Grid& g) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  omlab::GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = n01(rng);
  return f;
}

void BM_MaximalFast1D(benchmark::State& state) {
  const omlab::Grid g(1, static_cast<int>(state.range(0)), 1.0);
  const auto f = noise(g);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::maximal(f).output);
  state.SetComplexityN(state.range(0));
}

void BM_MaximalBrute1D(benchmark::State& state) {
  const omlab::Grid g(1, static_cast<int>(state.range(0)), 1.0);
  const auto f = noise(g);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::maximal_bruteforce(f).output);
  state.SetComplexityN(state.range(0));
}

void BM_MaximalFast2D(benchmark::State& state) {
  const omlab::Grid g(2, static_cast<int>(state.range(0)), 1.0);
  const auto f = noise(g);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::maximal(f).output);
}

void BM_WeightedMaximal1D(benchmark::State& state) {
  const omlab::Grid g(1, static_cast<int>(state.range(0)), 1.0);
  const auto f = noise(g);
  omlab::GridFunction wv(g);
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = 1.0 + std::abs(f[i]);
  const omlab::Weight w(std::move(wv));
  for (auto _ : state) benchmark::DoNotOptimize(omlab::weighted_maximal(f, w).output);
}

}  // namespace

BENCHMARK(BM_MaximalFast1D)->RangeMultiplier(2)->Range(256, 8192)->Complexity();
BENCHMARK(BM_MaximalBrute1D)->RangeMultiplier(2)->Range(128, 1024)->Complexity();
BENCHMARK(BM_MaximalFast2D)->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_WeightedMaximal1D)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();

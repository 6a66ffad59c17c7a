#include <benchmark/benchmark.h>

#include <random>

#include "omlab/norms.hpp"
#include "omlab/weights.hpp"

namespace {

struct Setup {
  omlab::Grid g;
  omlab::GridFunction f;
  omlab::GrowthContext ctx;

  explicit Setup(int n)
      : g(1, n, 1.0), f(g), ctx(omlab::parse_weight("abspow(0.5)", g)) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = n01(rng);
  }
};

void BM_LuxemburgBall(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const auto b = omlab::centered_ball(s.g, s.f.size() / 2, s.g.max_level() - 1);
  const auto Phi = omlab::kinked_quadratic();
  for (auto _ : state) benchmark::DoNotOptimize(omlab::luxemburg_norm(s.f, Phi, omlab::invwball(), s.ctx, b).value);
}

void BM_WeakBall(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const auto b = omlab::centered_ball(s.g, s.f.size() / 2, s.g.max_level() - 1);
  const auto Phi = omlab::kinked_quadratic();
  for (auto _ : state) benchmark::DoNotOptimize(omlab::weak_norm(s.f, Phi, omlab::invwball(), s.ctx, b).value);
}

void BM_GlobalNorm(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const auto Phi = omlab::power(2.0);
  const auto kind = state.range(1) == 0 ? omlab::NormKind::Strong : omlab::NormKind::Weak;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        omlab::global_norm(s.f, Phi, omlab::wballpow(0.5), s.ctx, omlab::BallFamily::lattice(), kind).value);
}

void BM_ApConstant(benchmark::State& state) {
  const omlab::Grid g(1, static_cast<int>(state.range(0)), 1.0);
  const auto w = omlab::parse_weight("abspow(0.5)", g);
  for (auto _ : state) benchmark::DoNotOptimize(omlab::ap_constant(w, 2.0, omlab::BallFamily::lattice()).constant);
}

}  // namespace

BENCHMARK(BM_LuxemburgBall)->Arg(1024)->Arg(4096);
BENCHMARK(BM_WeakBall)->Arg(1024)->Arg(4096);
BENCHMARK(BM_GlobalNorm)->Args({1024, 0})->Args({1024, 1})->Args({4096, 0})->Args({4096, 1});
BENCHMARK(BM_ApConstant)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "krrdd/data.hpp"
#include "krrdd/distill.hpp"
#include "krrdd/kernel.hpp"
#include "krrdd/krr.hpp"
#include "krrdd/optdistill.hpp"
#include "krrdd/rff.hpp"

using namespace krrdd;

namespace {

Matrix gaussian_points(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) x(i, k) = 2.0 * rng.normal();
  }
  return x;
}

const KernelSpec kSpec = KernelSpec::squared_exponential(1.5);

}  // namespace

static void BM_GramCross(benchmark::State& state) {
  const Matrix a = gaussian_points(state.range(0), state.range(1), 1);
  const Matrix b = gaussian_points(state.range(0), state.range(1), 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernel::gram(kSpec, a, b));
}
BENCHMARK(BM_GramCross)->Args({500, 2})->Args({2000, 2})->Args({1000, 784})->Unit(benchmark::kMillisecond);

static void BM_GramSym(benchmark::State& state) {
  const Matrix a = gaussian_points(state.range(0), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernel::gram(kSpec, a));
}
BENCHMARK(BM_GramSym)->Args({500, 2})->Args({2000, 2})->Args({1000, 784})->Unit(benchmark::kMillisecond);

// One full-batch gradient at (m, n, d).
static void BM_KipGrad(benchmark::State& state) {
  const Index m = state.range(0);
  const Index n = state.range(1);
  const Index d = state.range(2);
  const Matrix x = gaussian_points(n, d, 3);
  const Matrix s = x.topRows(m);
  Rng rng(4);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = rng.normal();
  const Vector ys = y.head(m);
  for (auto _ : state) benchmark::DoNotOptimize(optdistill::kip_grad(s, ys, x, y, kSpec, 1e-5));
}
BENCHMARK(BM_KipGrad)
    ->Args({20, 500, 2})
    ->Args({400, 2000, 2})
    ->Args({1300, 2000, 2})
    ->Args({900, 2000, 784})
    ->Unit(benchmark::kMillisecond);

static void BM_WeightedMap(benchmark::State& state) {
  const Matrix x = gaussian_points(state.range(0), 2, 5);
  for (auto _ : state) {
    Rng rng(6);
    benchmark::DoNotOptimize(rff::weighted_map(kSpec, state.range(1), x, 1e-5, rff::kDefaultPoolFactor, rng));
  }
}
BENCHMARK(BM_WeightedMap)->Args({500, 100})->Args({2000, 400})->Unit(benchmark::kMillisecond);

static void BM_SolveAlpha(benchmark::State& state) {
  const Index n = state.range(0);
  const Index s_phi = state.range(1);
  const Matrix x = gaussian_points(n, 2, 7);
  Rng rng(8);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = rng.normal();
  const FeatureMap map = rff::plain_map(kSpec, s_phi, 2, rng);
  const Matrix xt = rff::apply(map, x);
  const Matrix s = x.topRows(s_phi + 1);
  for (auto _ : state) benchmark::DoNotOptimize(distill::solve_alpha(s, x, xt, y, kSpec, 1e-5));
}
BENCHMARK(BM_SolveAlpha)->Args({500, 100})->Args({2000, 400})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

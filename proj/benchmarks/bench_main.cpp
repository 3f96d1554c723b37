#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "bsdelab/catalog.hpp"
#include "bsdelab/ensemble.hpp"
#include "bsdelab/psi.hpp"
#include "bsdelab/regression.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/solver.hpp"

using namespace bsdelab;

static void BM_Psi(benchmark::State& state) {
  SplitMix64 g{7};
  std::vector<double> xs(4096);
  for (double& x : xs) x = 1e-3 * std::exp(12.0 * g.next_uniform());
  const PsiWeight mu(1.5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(psi(xs[i++ & 4095], mu));
  }
}
BENCHMARK(BM_Psi);

static void BM_YoungGap(benchmark::State& state) {
  SplitMix64 g{8};
  std::vector<double> xs(4096), ys(4096);
  for (std::size_t i = 0; i < 4096; ++i) {
    xs[i] = 20.0 * (g.next_uniform() - 0.5);
    ys[i] = std::exp(10.0 * g.next_uniform());
  }
  const PsiWeight mu(2.0);
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t k = i++ & 4095;
    benchmark::DoNotOptimize(young_gap(xs[k], ys[k], mu));
  }
}
BENCHMARK(BM_YoungGap);

static void BM_NormalInvCdf(benchmark::State& state) {
  SplitMix64 g{9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_inv_cdf(g.next_uniform()));
  }
}
BENCHMARK(BM_NormalInvCdf);

static void BM_GeneratePaths(benchmark::State& state) {
  const TimeGrid grid(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    PathEnsemble p = generate_paths(grid, 1, 4096, 42);
    benchmark::DoNotOptimize(p.increments.data());
  }
  state.SetItemsProcessed(state.iterations() * 4096 * state.range(0));
}
BENCHMARK(BM_GeneratePaths)->Arg(16)->Arg(64);

static void BM_Girsanov(benchmark::State& state) {
  const TimeGrid grid(1.0, 32);
  const PathEnsemble paths = generate_paths(grid, 1, 16384, 43);
  const std::vector<double> q{1.0};
  const AdaptedDrift drift = AdaptedDrift::constant(paths, q);
  for (auto _ : state) {
    std::vector<double> w = girsanov_weight(paths, drift, 0, 32);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * 16384);
}
BENCHMARK(BM_Girsanov);

static void BM_RegressionStep(benchmark::State& state) {
  const std::size_t M = 16384;
  SplitMix64 g{44};
  std::vector<double> states(M), target(M);
  for (std::size_t m = 0; m < M; ++m) {
    states[m] = g.next_normal();
    target[m] = std::sin(states[m]) + 0.1 * g.next_normal();
  }
  const PolynomialBasis basis(1, 4);
  for (auto _ : state) {
    StepRegression reg(basis, states, M);
    std::vector<double> fit = reg.fit(target);
    benchmark::DoNotOptimize(fit.data());
  }
  state.SetItemsProcessed(state.iterations() * M);
}
BENCHMARK(BM_RegressionStep);

static void BM_SolveSmall(benchmark::State& state) {
  const GeneratorSpec gen = make_catalog_generator("mixed", 0.5, 0.5, "zero", 0.0);
  const TerminalSpec xi = make_catalog_terminal("abs_w_t", 1.0, 1.0);
  const PathEnsemble paths = generate_paths(TimeGrid(1.0, 20), 1, 4096, 45);
  for (auto _ : state) {
    SolutionField sol = solve(gen, xi, paths);
    benchmark::DoNotOptimize(sol.y0());
  }
}
BENCHMARK(BM_SolveSmall)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

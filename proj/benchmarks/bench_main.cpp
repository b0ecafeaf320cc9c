#include <benchmark/benchmark.h>

#include "vgne/augmented.hpp"
#include "vgne/builtins.hpp"
#include "vgne/learner.hpp"
#include "vgne/oracles.hpp"

using namespace vgne;

// Learner updates per second; the reference equilibrium is computed once outside the loop.
static void BM_LearnerRun(benchmark::State& state) {
  const GameSpec g = state.range(0) < 0 ? paper_example() : random_quadratic(static_cast<std::uint64_t>(state.range(0)));
  RunOptions opts;
  opts.reference = reference_equilibrium(g);
  const long T = 10'000;
  for (auto _ : state) benchmark::DoNotOptimize(run(g, Schedules{}, T, 1, opts));
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_LearnerRun)->Arg(-1)->Arg(0)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_SolveVgne(benchmark::State& state) {
  const GameSpec g = random_quadratic(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_vgne(g));
}
BENCHMARK(BM_SolveVgne)->DenseRange(0, 4);

static void BM_SolveRegularized(benchmark::State& state) {
  const GameSpec g = random_quadratic(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_regularized_vi(g, 1e-2));
}
BENCHMARK(BM_SolveRegularized)->DenseRange(0, 4);

static void BM_Extragradient(benchmark::State& state) {
  const GameSpec g = softplus_coupled_example();
  for (auto _ : state) benchmark::DoNotOptimize(solve_regularized_vi_extragradient(g, 1e-2));
}
BENCHMARK(BM_Extragradient)->Unit(benchmark::kMillisecond);

static void BM_ExtendedPseudoGradient(benchmark::State& state) {
  const GameSpec g = random_quadratic(3);
  const AugmentedPoint z{JointAction(g.layout(), Vector::Ones(g.dim())), Vector::Ones(g.num_constraints())};
  for (auto _ : state) benchmark::DoNotOptimize(extended_pseudo_gradient(g, z));
}
BENCHMARK(BM_ExtendedPseudoGradient);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "spinmarket/kernel.hpp"
#include "spinmarket/longmem.hpp"
#include "spinmarket/spectral.hpp"
#include "spinmarket/spin_core.hpp"

using namespace spinmarket;

static void BM_KernelStepDistribution(benchmark::State& state) {
  const ModelParams p = ModelParams::frozen(static_cast<int>(state.range(0)), 3);
  int i = 0, j = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(macro_step_distribution({i, j}, p));
    if (++i > p.n) {
      i = 0;
      j = (j + 1) % (p.arc_count() + 1);
    }
  }
}
BENCHMARK(BM_KernelStepDistribution)->Arg(10)->Arg(30);

static void BM_AssembleMatrix(benchmark::State& state) {
  const ModelParams p = ModelParams::frozen(static_cast<int>(state.range(0)), 18);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_matrix(p));
}
BENCHMARK(BM_AssembleMatrix)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_StationaryMeasure(benchmark::State& state) {
  const TransitionMatrix m =
      assemble_matrix(ModelParams::frozen(static_cast<int>(state.range(0)), 18));
  for (auto _ : state) benchmark::DoNotOptimize(stationary_measure(m));
}
BENCHMARK(BM_StationaryMeasure)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

// dense path at N=10, ARPACK at N=20
static void BM_SpectralGap(benchmark::State& state) {
  const TransitionMatrix m =
      assemble_matrix(ModelParams::frozen(static_cast<int>(state.range(0)), 18));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_gap(m));
}
BENCHMARK(BM_SpectralGap)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_MicroStep(benchmark::State& state) {
  const ModelParams p = ModelParams::frozen(static_cast<int>(state.range(0)), 10);
  MicroConfig c = MicroConfig::with_counts(p.n, {p.n / 2, p.arc_count() / 2});
  Rng rng = make_rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(heat_bath_step(c, p, rng));
}
BENCHMARK(BM_MicroStep)->Arg(10)->Arg(50);

static void BM_MacroChain(benchmark::State& state) {
  const ModelParams p = ModelParams::frozen(10, 10);
  for (auto _ : state) {
    Rng rng = make_rng(2);
    benchmark::DoNotOptimize(simulate_macro_chain({5, 22}, p, state.range(0), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MacroChain)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_RsCurve(benchmark::State& state) {
  Rng rng = make_rng(3);
  const auto path = site_series(simulate_macro_chain({5, 22}, ModelParams::frozen(10, 10),
                                                     state.range(0), rng));
  const std::vector<int> taus{50, 100, 200, 500, 1000};
  RsOptions o;
  o.input = RsInput::kLevels;
  for (auto _ : state) benchmark::DoNotOptimize(rs_curve(path, taus, o));
}
BENCHMARK(BM_RsCurve)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

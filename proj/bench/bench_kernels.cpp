// Serial reference vs OpenMP drivers for the evaluator's kernels.

#include <benchmark/benchmark.h>

#include "alphamine/eval_engine.hpp"
#include "alphamine/kernels.hpp"
#include "alphamine/synth.hpp"

namespace {

using alphamine::kernels::Exec;

const alphamine::MarketPanel& panel() {
  static const alphamine::MarketPanel p = [] {
    alphamine::SynthConfig cfg;
    cfg.assets = 500;
    cfg.periods = 2000;
    return alphamine::make_synthetic_panel(cfg);
  }();
  return p;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_TsMean(benchmark::State& state) {
  const auto& close = panel().field("close");
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphamine::kernels::rolling(alphamine::kernels::Rolling::mean, close, 20, exec_of(state)));
  }
}

void BM_TsRank(benchmark::State& state) {
  const auto& close = panel().field("close");
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphamine::kernels::rolling(alphamine::kernels::Rolling::rank, close, 20, exec_of(state)));
  }
}

void BM_TsCorr(benchmark::State& state) {
  const auto& close = panel().field("close");
  const auto& volume = panel().field("volume");
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphamine::kernels::rolling_corr(close, volume, 20, exec_of(state)));
  }
}

void BM_CsRank(benchmark::State& state) {
  const auto& close = panel().field("close");
  for (auto _ : state) benchmark::DoNotOptimize(alphamine::kernels::cs_rank(close, exec_of(state)));
}

void BM_Evaluate(benchmark::State& state) {
  const auto scenario = alphamine::default_scenario();
  const auto cf = alphamine::realize(
      alphamine::parse_valid("rank(div(ts_corr(close,volume,10),add(ts_std(return,20),0.01)))", scenario), scenario);
  for (auto _ : state) benchmark::DoNotOptimize(alphamine::evaluate(cf, panel(), exec_of(state)));
}

}  // namespace

BENCHMARK(BM_TsMean)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TsRank)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TsCorr)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CsRank)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

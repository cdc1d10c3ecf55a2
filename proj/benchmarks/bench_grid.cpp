// Grid-scan kernel: naive reference vs cached serial vs OpenMP-parallel,
// plus replay throughput on zero-intelligence flow.

#include <benchmark/benchmark.h>

#include "impactlab/order_flow.hpp"
#include "impactlab/regression.hpp"
#include "impactlab/synth.hpp"

using namespace impactlab;

namespace {

std::vector<ImpactObservation> bench_observations(int n) {
  ObsConfig cfg;
  cfg.seed = 99;
  cfg.n = n;
  cfg.truth = TruthParams::for_levels(2);
  cfg.truth.alpha = 0.55;
  cfg.truth.beta = 0.10;
  return model_observations(cfg).rows;
}

ModelSpec bench_spec() {
  ModelSpec spec;
  spec.kind = ModelKind::power_law;
  spec.levels = 2;
  spec.include_dummies = false;
  return spec;
}

void GridReference(benchmark::State& state) {
  const auto obs = bench_observations(static_cast<int>(state.range(0)));
  const ModelSpec spec = bench_spec();
  for (auto _ : state) {
    auto result = grid_calibrate_reference(obs, spec);
    benchmark::DoNotOptimize(result.fit.r2_adj);
  }
}

void GridSerial(benchmark::State& state) {
  const auto obs = bench_observations(static_cast<int>(state.range(0)));
  const ModelSpec spec = bench_spec();
  for (auto _ : state) {
    auto result = grid_calibrate(obs, spec, GridExecution::serial);
    benchmark::DoNotOptimize(result.fit.r2_adj);
  }
}

void GridParallel(benchmark::State& state) {
  const auto obs = bench_observations(static_cast<int>(state.range(0)));
  const ModelSpec spec = bench_spec();
  for (auto _ : state) {
    auto result = grid_calibrate(obs, spec, GridExecution::parallel);
    benchmark::DoNotOptimize(result.fit.r2_adj);
  }
}

void ReplayThroughput(benchmark::State& state) {
  FlowConfig cfg;
  cfg.seed = 7;
  cfg.events = static_cast<int>(state.range(0));
  const auto events = zero_intelligence_flow(cfg);
  for (auto _ : state) {
    Replayer replayer(cfg.instrument, 6);
    auto trades = replayer.replay(events);
    benchmark::DoNotOptimize(trades.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}

}  // namespace

BENCHMARK(GridReference)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(GridSerial)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(GridParallel)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(ReplayThroughput)->Arg(50000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

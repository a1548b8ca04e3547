#include <benchmark/benchmark.h>

#include "repvis/simulate.hpp"

using namespace repvis;

namespace {

SimConfig bench_config() {
  Scenario pre;
  pre.risky = OutcomeTech(0.7, 0.4);
  pre.safe = Arm(OutcomeTech(0.6, 0.5));
  pre.signal = SignalTech(0.9, 0.1);
  pre.vis_risky = VisibilityKernel::constant(1.0, 0.5);
  pre.vis_safe = VisibilityKernel::constant(1.0, 1.0);
  pre.value = ValueFunction::linear(1.0, 0.0);

  SimConfig cfg;
  cfg.scenario_pre = pre;
  cfg.reform = ReformShift::constants(0.5, 0.0);
  cfg.n_authors = 500;
  cfg.n_fields = 20;
  cfg.periods = 12;
  for (std::size_t f = 0; f < cfg.n_fields; ++f)
    cfg.adoption_times.push_back(5 + static_cast<int>(f % 5));
  cfg.belief_spread = {{0.05, 0.95}};
  cfg.burn_in = 6;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

static void BM_SimulatePanel(benchmark::State& state) {
  const SimConfig cfg = bench_config();
  const unsigned threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    const auto rows = simulate(cfg, threads);
    benchmark::DoNotOptimize(rows.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.n_authors) *
                          cfg.periods);
}
BENCHMARK(BM_SimulatePanel)->Arg(1)->Arg(2);

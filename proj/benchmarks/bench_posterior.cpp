#include <benchmark/benchmark.h>

#include "repvis/posterior.hpp"

using namespace repvis;

static void BM_PosteriorSplit(benchmark::State& state) {
  const OutcomeTech tech(0.8, 0.4);
  double pi = 0.01;
  for (auto _ : state) {
    const PosteriorSplit s = split(pi, tech);
    benchmark::DoNotOptimize(s.pi_plus);
    pi += 0.001;
    if (pi > 0.99) pi = 0.01;
  }
}
BENCHMARK(BM_PosteriorSplit);

static void BM_PosteriorVarianceTripleCheck(benchmark::State& state) {
  const OutcomeTech tech(0.8, 0.4);
  double pi = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(posterior_variance(pi, tech));
    pi += 0.001;
    if (pi > 0.99) pi = 0.01;
  }
}
BENCHMARK(BM_PosteriorVarianceTripleCheck);

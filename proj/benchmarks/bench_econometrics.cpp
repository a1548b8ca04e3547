#include <benchmark/benchmark.h>

#include "repvis/econometrics.hpp"
#include "repvis/rng.hpp"

using namespace repvis;

namespace {

Dataset bench_panel(std::size_t n_authors, std::size_t n_fields, int periods) {
  CounterRng rng = CounterRng::keyed(31, {1});
  std::vector<double> author, field, period, event, post, rep, y;
  for (std::size_t a = 0; a < n_authors; ++a) {
    const std::size_t f = a % n_fields;
    const int adopt = 5 + static_cast<int>(f % 5);
    const double rep_i = rng.next_unit();
    for (int t = 1; t <= periods; ++t) {
      author.push_back(static_cast<double>(a));
      field.push_back(static_cast<double>(f));
      period.push_back(t);
      event.push_back(t - adopt);
      post.push_back(t >= adopt ? 1.0 : 0.0);
      rep.push_back(rep_i);
      y.push_back(0.1 * rep_i * (t >= adopt ? 1.0 : 0.0) + rng.uniform(-0.2, 0.2));
    }
  }
  Dataset d;
  d.add_column("author_id", std::move(author));
  d.add_column("field_id", std::move(field));
  d.add_column("period", std::move(period));
  d.add_column("event_time", std::move(event));
  d.add_column("post", std::move(post));
  d.add_column("rep_pre", std::move(rep));
  d.add_column("risky", std::move(y));
  return d;
}

}  // namespace

static void BM_EventStudy(benchmark::State& state) {
  const Dataset d = bench_panel(static_cast<std::size_t>(state.range(0)), 20, 12);
  RegressionSpec spec;
  for (auto _ : state) {
    const EventStudyResult fit = fit_event_study(d, spec);
    benchmark::DoNotOptimize(fit.post_avg_early);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(d.n_rows()));
}
BENCHMARK(BM_EventStudy)->Arg(250)->Arg(500)->Arg(1000);

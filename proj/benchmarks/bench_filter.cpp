#include <benchmark/benchmark.h>

#include "barnet/filter.hpp"
#include "barnet/harness.hpp"

using namespace barnet;

namespace {

void BM_FilterPredict(benchmark::State& state) {
  const int m = 9;
  const int particles = static_cast<int>(state.range(0));
  NetworkModel truth = gen_ground_truth(m, m, 3);
  EventMatrix x = simulate_bar(truth, 318, 5);
  auto miss = MissingnessSpec::scalar(0.75, 0.75, m);
  EventMatrix z = apply_missingness(x, miss, 7).first;
  FilterConfig cfg;
  cfg.n_particles = particles;
  cfg.obs = miss;
  cfg.seed = 11;
  for (auto _ : state) benchmark::DoNotOptimize(filter_predict(truth, z, cfg));
}
BENCHMARK(BM_FilterPredict)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

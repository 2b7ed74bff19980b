#include <benchmark/benchmark.h>

#include "barnet/harness.hpp"
#include "barnet/optimizer.hpp"
#include "barnet/rng.hpp"

using namespace barnet;

namespace {

void BM_ProjectL1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(project_l1_ball(v, 1.0));
}
BENCHMARK(BM_ProjectL1)->Arg(50)->Arg(500)->Arg(5000);

void BM_FitRow(benchmark::State& state) {
  const int m = 20, t = 2000;
  NetworkModel truth = gen_ground_truth(m, m, 5);
  EventMatrix x = simulate_bar(truth, t, 9);
  auto miss = MissingnessSpec::scalar(0.7, 0.7, m);
  EventMatrix z = apply_missingness(x, miss, 21).first;
  LossSpec spec;
  spec.family = LossFamily::Unbiased;
  spec.degree = 2;
  spec.p_hat = Eigen::VectorXd::Constant(m, 0.7);
  FitConfig cfg;
  cfg.seed = 1;
  cfg.tol = 1e-7;
  auto stats = std::make_shared<const SuffStats>(SuffStats::build(z));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_row(spec, z, 0, cfg, nullptr, stats));
  }
}
BENCHMARK(BM_FitRow)->Unit(benchmark::kMillisecond);

}  // namespace

#include <benchmark/benchmark.h>

#include "barnet/harness.hpp"
#include "barnet/loss.hpp"
#include "barnet/model.hpp"
#include "barnet/rng.hpp"

using namespace barnet;

namespace {

struct Fixture {
  EventMatrix z;
  Eigen::VectorXd a;
  std::shared_ptr<const TransitionCache> cache;
  std::shared_ptr<const SuffStats> stats;

  Fixture(int m, int t) {
    NetworkModel truth = gen_ground_truth(m, m, 7);
    EventMatrix x = simulate_bar(truth, t, 11);
    auto miss = MissingnessSpec::scalar(0.7, 0.7, m);
    z = apply_missingness(x, miss, 13).first;
    Rng rng(17);
    a = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) a[i] = rng.uniform(-0.05, 0.05);
    cache = std::make_shared<const TransitionCache>(TransitionCache::build(z));
    stats = std::make_shared<const SuffStats>(SuffStats::build(z));
  }
};

LossSpec spec_for(LossFamily family, int q, int m) {
  LossSpec s;
  s.family = family;
  s.degree = q;
  if (family == LossFamily::Unbiased) s.p_hat = Eigen::VectorXd::Constant(m, 0.7);
  return s;
}

void BM_LossValueAndGrad(benchmark::State& state, LossFamily family, int q) {
  const int m = 50, t = 2000;
  static Fixture fix(m, t);
  RowObjective obj(spec_for(family, q, m), fix.z, 0, fix.cache, fix.stats);
  Eigen::VectorXd grad(m);
  double gi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.value_and_grad(fix.a, 0.0, grad, gi));
  }
}

BENCHMARK_CAPTURE(BM_LossValueAndGrad, complete, LossFamily::Complete, 0);
BENCHMARK_CAPTURE(BM_LossValueAndGrad, truncated_q4, LossFamily::Truncated, 4);
BENCHMARK_CAPTURE(BM_LossValueAndGrad, unbiased_q2, LossFamily::Unbiased, 2);
BENCHMARK_CAPTURE(BM_LossValueAndGrad, unbiased_q4, LossFamily::Unbiased, 4);

}  // namespace

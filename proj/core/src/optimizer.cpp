#include "barnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "barnet/errors.hpp"
#include "barnet/rng.hpp"
#include "barnet/util.hpp"

namespace barnet {

void FitConfig::validate() const {
  if (radius <= 0) throw ConfigError("FitConfig: radius must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw ConfigError("FitConfig: backtrack_factor must lie in (0,1)");
  if (max_iters < 1) throw ConfigError("FitConfig: max_iters must be >= 1");
  if (tol < 0) throw ConfigError("FitConfig: tol must be >= 0");
  if (step_init <= 0) throw ConfigError("FitConfig: step_init must be positive");
  if (init == Init::Warm && warm_a.size() == 0 && warm_A.size() == 0)
    throw ConfigError("FitConfig: warm init requires warm_a or warm_A");
}

double FitConfig::resolve_lambda(int t_eff) const {
  if (lambda >= 0) return lambda;
  return 0.75 / std::sqrt(static_cast<double>(t_eff));
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  if (t < 0) throw ConfigError("soft_threshold: threshold must be >= 0");
  return v.array().sign() * (v.array().abs() - t).max(0.0);
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double r) {
  if (r <= 0) throw ConfigError("project_l1_ball: radius must be positive");
  const double norm1 = v.lpNorm<1>();
  if (norm1 <= r) return v;
  const int n = static_cast<int>(v.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return std::abs(v[i]) > std::abs(v[j]); });
  double cum = 0.0, theta = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += std::abs(v[order[k]]);
    const double cand = (cum - r) / (k + 1);
    if (k + 1 == n || std::abs(v[order[k + 1]]) <= cand) {
      theta = cand;
      break;
    }
  }
  return soft_threshold(v, theta);
}

Eigen::VectorXd random_in_l1_ball(int dim, double radius, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd e(dim);
  for (int i = 0; i < dim; ++i) e[i] = rng.exponential();
  const double total = e.sum() + rng.exponential();
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim; ++i) {
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    out[i] = sign * radius * e[i] / total;
  }
  return out;
}

namespace {

struct StepResult {
  Eigen::VectorXd a;
  double intercept;
  double move2;  // squared movement including the intercept
};

StepResult take_step(const Eigen::VectorXd& a, double intercept, const Eigen::VectorXd& ga,
                     double gi, double eta, double lambda, double radius, bool with_intercept) {
  StepResult s;
  s.a = project_l1_ball(soft_threshold(a - eta * ga, eta * lambda), radius);
  s.intercept = with_intercept ? intercept - eta * gi : intercept;
  s.move2 = (s.a - a).squaredNorm();
  const double di = s.intercept - intercept;
  s.move2 += di * di;
  return s;
}

constexpr double kEtaMin = 1e-14;
constexpr double kSufficientDecrease = 1e-4;

}  // namespace

RowFit fit_row(const LossSpec& spec, const EventMatrix& data, int m, const FitConfig& cfg,
               std::shared_ptr<const TransitionCache> cache,
               std::shared_ptr<const SuffStats> stats) {
  cfg.validate();
  RowObjective obj(spec, data, m, std::move(cache), std::move(stats));
  const int dim = obj.dim();
  const double lambda = cfg.resolve_lambda(obj.t_eff());
  const bool with_intercept = spec.include_intercept;

  RowFit fit;
  switch (cfg.init) {
    case FitConfig::Init::Zero:
      fit.a = Eigen::VectorXd::Zero(dim);
      break;
    case FitConfig::Init::RandomBall:
      fit.a = random_in_l1_ball(dim, cfg.radius, cfg.seed);
      break;
    case FitConfig::Init::Warm:
      if (cfg.warm_a.size() != dim) throw ConfigError("fit_row: warm_a dimension mismatch");
      fit.a = project_l1_ball(cfg.warm_a, cfg.radius);
      fit.intercept = cfg.warm_intercept;
      break;
  }

  Eigen::VectorXd ga(dim);
  double gi = 0.0;
  double loss = obj.value_and_grad(fit.a, fit.intercept, ga, gi);
  if (!std::isfinite(loss))
    throw DataError("fit_row: objective non-finite at the initial point (row " +
                    std::to_string(m) + ")");
  double objective = loss + lambda * fit.a.lpNorm<1>();
  fit.objective_trace.push_back(objective);

  double eta = cfg.step_init;

  // Already stationary at the requested resolution: return without moving.
  {
    StepResult probe =
        take_step(fit.a, fit.intercept, ga, gi, eta, lambda, cfg.radius, with_intercept);
    fit.stationarity_gap = std::sqrt(probe.move2) / eta;
    if (fit.stationarity_gap < cfg.tol) {
      fit.converged = true;
      return fit;
    }
  }

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    eta = std::min(eta / cfg.backtrack_factor, cfg.step_init);
    bool accepted = false;
    StepResult cand;
    double cand_objective = 0.0;
    while (eta >= kEtaMin) {
      cand = take_step(fit.a, fit.intercept, ga, gi, eta, lambda, cfg.radius, with_intercept);
      const double cand_loss = obj.value(cand.a, cand.intercept);
      cand_objective = cand_loss + lambda * cand.a.lpNorm<1>();
      if (std::isfinite(cand_objective) &&
          cand_objective <= objective - kSufficientDecrease * cand.move2 / eta) {
        accepted = true;
        break;
      }
      eta *= cfg.backtrack_factor;
    }
    if (!accepted) break;  // no descent direction at any step size: stationary

    const double prev = objective;
    fit.a = std::move(cand.a);
    fit.intercept = cand.intercept;
    objective = cand_objective;
    fit.objective_trace.push_back(objective);
    fit.iterations = iter + 1;

    loss = obj.value_and_grad(fit.a, fit.intercept, ga, gi);
    if (!std::isfinite(loss))
      throw DataError("fit_row: objective became non-finite at iteration " +
                      std::to_string(iter + 1) + " (row " + std::to_string(m) + ")");

    if (std::abs(prev - objective) <= cfg.tol * std::max(1.0, std::abs(prev))) {
      fit.converged = true;
      break;
    }
  }

  StepResult probe =
      take_step(fit.a, fit.intercept, ga, gi, eta, lambda, cfg.radius, with_intercept);
  fit.stationarity_gap = std::sqrt(probe.move2) / eta;
  return fit;
}

FitReport fit_network(const LossSpec& spec, const EventMatrix& data, const FitConfig& cfg) {
  cfg.validate();
  spec.validate(data.nodes());
  const int M = data.nodes();

  std::shared_ptr<const TransitionCache> cache;
  std::shared_ptr<const SuffStats> stats;
  if (spec.family == LossFamily::Unbiased && spec.effective_degree() == 2) {
    stats = std::make_shared<const SuffStats>(SuffStats::build(data));
  } else {
    cache = std::make_shared<const TransitionCache>(TransitionCache::build(data));
  }

  if (cfg.init == FitConfig::Init::Warm && cfg.warm_A.size() > 0 &&
      (cfg.warm_A.rows() != M || cfg.warm_A.cols() != M))
    throw ConfigError("fit_network: warm_A dimension mismatch");

  std::vector<RowFit> fits(M);
  parallel_for(M, cfg.threads, [&](int m) {
    FitConfig row_cfg = cfg;
    row_cfg.threads = 1;
    row_cfg.seed = mix_seed(cfg.seed, hash_label(data.node_ids[m]));
    if (cfg.init == FitConfig::Init::Warm && cfg.warm_A.size() > 0) {
      row_cfg.warm_a = cfg.warm_A.row(m).transpose();
      row_cfg.warm_intercept = cfg.warm_nu.size() == M ? cfg.warm_nu[m] : 0.0;
    }
    try {
      fits[m] = fit_row(spec, data, m, row_cfg, cache, stats);
    } catch (const std::exception& e) {
      throw DataError("fit_network: row " + std::to_string(m) + " (" + data.node_ids[m] +
                      "): " + e.what());
    }
  });

  FitReport report;
  report.model.A.resize(M, M);
  report.model.nu = Eigen::VectorXd::Zero(M);
  for (int m = 0; m < M; ++m) {
    report.model.A.row(m) = fits[m].a.transpose();
    report.model.nu[m] = fits[m].intercept;
    report.objective_trace.push_back(std::move(fits[m].objective_trace));
    report.iterations.push_back(fits[m].iterations);
    report.stationarity_gap.push_back(fits[m].stationarity_gap);
    report.converged.push_back(fits[m].converged);
  }
  report.model.ball_constrained = cfg.radius <= 1.0 || report.model.rows_in_ball();
  report.lambda_resolved = cfg.resolve_lambda(data.bins() - 1);
  report.seed = cfg.seed;
  report.config = cfg;
  report.spec = spec;

  if (spec.family != LossFamily::Complete && spec.include_intercept) {
    int outside = 0;
    for (int m = 0; m < M; ++m) {
      if (report.model.A.row(m).lpNorm<1>() + std::abs(report.model.nu[m]) > 1.0 + 1e-9)
        ++outside;
    }
    if (outside > 0)
      std::cerr << "barnet: warning: " << outside << " of " << M
                << " fitted rows have ||a||_1 + |intercept| > 1; the polynomial loss is "
                   "evaluated outside its recommended expansion region there\n";
  }
  return report;
}

}  // namespace barnet

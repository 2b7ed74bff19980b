#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "barnet/loss.hpp"
#include "barnet/model.hpp"

namespace barnet {

struct FitConfig {
  // Negative means auto: 0.75 / sqrt(T_eff).
  double lambda = -1.0;
  double radius = 1.0;
  int max_iters = 10000;
  double tol = 1e-8;  // relative objective change
  double step_init = 1.0;
  double backtrack_factor = 0.5;
  std::uint64_t seed = 0;

  enum class Init { Zero, RandomBall, Warm };
  Init init = Init::RandomBall;
  Eigen::VectorXd warm_a;  // fit_row
  double warm_intercept = 0.0;
  // fit_network warm start: row m of warm_A (and warm_nu[m]) seeds row m.
  Eigen::MatrixXd warm_A;
  Eigen::VectorXd warm_nu;

  int threads = 1;  // row-level parallelism in fit_network

  void validate() const;
  double resolve_lambda(int t_eff) const;
};

struct RowFit {
  Eigen::VectorXd a;
  double intercept = 0.0;
  std::vector<double> objective_trace;  // composite objective, non-increasing
  int iterations = 0;
  double stationarity_gap = 0.0;
  bool converged = false;
};

struct FitReport {
  NetworkModel model;
  std::vector<std::vector<double>> objective_trace;
  std::vector<int> iterations;
  std::vector<double> stationarity_gap;
  std::vector<bool> converged;
  double lambda_resolved = 0.0;
  std::uint64_t seed = 0;
  FitConfig config;
  LossSpec spec;
};

// sign(v_i) * max(|v_i| - t, 0)
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

// Euclidean projection onto {x : ||x||_1 <= r}; identity inside the ball,
// otherwise soft-thresholds at the water-filling level found by sorting
// magnitudes (ties broken by index).
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double r);

// Proximal step then ball projection:
//   a <- project( soft_threshold(a - eta grad, eta lambda), r )
// with backtracking on eta until sufficient decrease of the composite
// objective. The intercept (when enabled) takes a plain unpenalized,
// unprojected gradient step inside the same backtracking test.
RowFit fit_row(const LossSpec& spec, const EventMatrix& data, int m, const FitConfig& cfg,
               std::shared_ptr<const TransitionCache> cache = nullptr,
               std::shared_ptr<const SuffStats> stats = nullptr);

// Runs fit_row for every row; rows are independent and may run in parallel.
// Per-row init streams are derived from the node label so relabeling nodes
// permutes the fit consistently.
FitReport fit_network(const LossSpec& spec, const EventMatrix& data, const FitConfig& cfg);

// Uniform sample from the l1 ball of the given radius (exponential-spacing
// construction with random signs).
Eigen::VectorXd random_in_l1_ball(int dim, double radius, std::uint64_t seed);

}  // namespace barnet

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "barnet/loss.hpp"
#include "barnet/model.hpp"
#include "barnet/optimizer.hpp"

namespace barnet {

// Desk-scale presets shrink the published grids (node count, trial count) so
// a full run fits in CI; paper_scale restores them.
struct ExperimentSpec {
  std::string name;  // mse_vs_T | robustness | truncation | holdout | filter_eval
  int M = 20;
  int s = 20;
  std::vector<int> T_grid;
  double p = 0.75;
  std::vector<double> p_hat_grid;
  std::vector<int> q_grid;
  int trials = 10;
  std::uint64_t seed = 1;
  int train_bins = 600;
  int test_bins = 318;
  int n_particles = 1000;
  int threads = 0;  // 0 = hardware
  double fit_tol = 1e-7;
  int fit_max_iters = 4000;

  static ExperimentSpec preset(const std::string& name, bool paper_scale = false);
  void validate() const;
};

struct ResultRow {
  std::string estimator;
  int T = 0;
  double p = 0.0;
  double p_hat = 0.0;  // 0 when not applicable
  int q = 0;           // 0 when not applicable
  int trial = 0;
  std::string metric;
  double value = 0.0;
};

struct SummaryRow {
  std::string estimator;
  int T = 0;
  double p = 0.0;
  double p_hat = 0.0;
  int q = 0;
  std::string metric;
  int n = 0;
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

struct ResultTable {
  std::string experiment;
  std::vector<ResultRow> raw;
  std::vector<SummaryRow> summary;
  std::vector<std::string> log;

  void rebuild_summary();
  // Median of the raw values matching the given cell; throws when absent.
  double median_of(const std::string& estimator, int T, double p_hat, int q,
                   const std::string& metric) const;
  std::string raw_csv() const;
  std::string summary_csv() const;
};

double median(std::vector<double> values);
double sample_stddev(const std::vector<double>& values);

// Sparse ground truth: s distinct entries of an M x M matrix drawn uniformly
// in [-1,1], bias zero; any row whose l1 norm exceeds 1 is rescaled onto the
// ball (logged via the returned model's flag, which is always set).
NetworkModel gen_ground_truth(int M, int s, std::uint64_t seed);

// ||A_hat - A_star||_F^2 / M^2
double mse(const NetworkModel& a_hat, const NetworkModel& a_star);

ResultTable run_mse_vs_T(const ExperimentSpec& spec);
ResultTable run_robustness(const ExperimentSpec& spec);
ResultTable run_truncation(const ExperimentSpec& spec);

// Fits the thinning-corrected loss per p_hat on z_train (and the exact loss
// on x_train when given) and scores the complete-data log-likelihood of
// x_test. The semi-synthetic driver simulates its own data per trial.
ResultTable run_holdout(const ExperimentSpec& spec);
ResultTable run_holdout_data(const EventMatrix& z_train, const EventMatrix& x_test,
                             const std::vector<double>& p_hat_grid, const ExperimentSpec& spec,
                             const EventMatrix* x_train = nullptr, int trial = 0,
                             ResultTable* into = nullptr);

ResultTable run_filter_eval(const ExperimentSpec& spec);

ResultTable run_experiment(const ExperimentSpec& spec);

// Smoothed one-node trajectories from one filter_eval trial: the corrected
// filter's predictive, the scale-corrected naive predictive, and the actual
// and observed event series, for the node with the most test events.
struct FilterTrajectories {
  int node = 0;
  std::string node_id;
  Eigen::VectorXd proposed;
  Eigen::VectorXd naive_scaled;
  Eigen::VectorXd actual_smoothed;
  Eigen::VectorXd observed_smoothed;
};
FilterTrajectories filter_eval_trajectories(const ExperimentSpec& spec, int trial,
                                            double sigma_bins = 3.0);

// Log-likelihood of the hold-out events under a fitted model:
// -(sum over rows of the exact per-row loss) * T_eff.
double holdout_loglik(const NetworkModel& model, const EventMatrix& x_test);

Eigen::VectorXd gaussian_smooth(const Eigen::VectorXd& series, double sigma_bins);

// Diagnostics (reported, not asserted): the smallest ratio
// (1/T) sum_t (v' x_t)^2 / ||v||_2^2 over random sparse directions, and the
// smallest tau making the curvature lower bound
// gap(v,w) >= alpha/2 ||v-w||_2^2 - tau ||v-w||_1^2 hold over sampled pairs.
double empirical_restricted_eigenvalue(const EventMatrix& x, int n_dirs, int sparsity,
                                       std::uint64_t seed);

struct CurvatureDiagnostic {
  double alpha = 0.1;
  double tau_hat = 0.0;
  double min_gap = 0.0;
};
CurvatureDiagnostic curvature_diagnostic(const LossSpec& spec, const EventMatrix& data, int m,
                                         int n_pairs, std::uint64_t seed, double alpha = 0.1);

}  // namespace barnet

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace barnet {

// Weighted network with a per-node bias. Row m of A holds the incoming
// weights of node m; event probability for node m at step t is
// sigmoid(nu[m] + A.row(m) * x_{t-1}).
struct NetworkModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd nu;
  // Set when every row is known to satisfy ||a_m||_1 <= 1.
  bool ball_constrained = false;

  int dim() const { return static_cast<int>(A.rows()); }
  bool rows_in_ball(double radius = 1.0, double tol = 1e-12) const;
  void validate() const;
};

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Dense M x T matrix of per-node, per-bin event indicators.
struct EventMatrix {
  BinaryMatrix data;
  std::vector<std::string> node_ids;
  std::optional<std::int64_t> bin_width_seconds;

  int nodes() const { return static_cast<int>(data.rows()); }
  int bins() const { return static_cast<int>(data.cols()); }
  void validate() const;

  static std::vector<std::string> default_node_ids(int m);
  static EventMatrix zeros(int m, int t);
};

// Per-node observation probabilities. `p` is the true thinning level used by
// simulation; `p_hat` is the estimate the losses and the filter consume.
struct MissingnessSpec {
  Eigen::VectorXd p;
  Eigen::VectorXd p_hat;

  static MissingnessSpec scalar(double p, double p_hat, int m);
  static MissingnessSpec exact(Eigen::VectorXd p);  // p_hat = p

  // min(p_hat) <= 1/pi: the infinite-degree limit of the unbiased loss is no
  // longer guaranteed to exist. Finite degrees stay well defined.
  bool below_theory_threshold() const;
  void validate() const;
};

double sigmoid(double x);
double softplus(double x);  // log(1 + exp(x)), overflow-safe

// Simulates the latent process for T steps from x0 (zeros when empty).
// burn_in extra steps are advanced and discarded before recording starts.
EventMatrix simulate_bar(const NetworkModel& model, int T, std::uint64_t seed,
                         const Eigen::VectorXd& x0 = Eigen::VectorXd(), int burn_in = 0);

// Independently thins every cell: W ~ Bernoulli(p_i), Z = W .* X.
// Returns (Z, W); the mask is exposed for test oracles only.
std::pair<EventMatrix, EventMatrix> apply_missingness(const EventMatrix& x,
                                                      const MissingnessSpec& spec,
                                                      std::uint64_t seed);

}  // namespace barnet

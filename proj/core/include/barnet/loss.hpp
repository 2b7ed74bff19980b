#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "barnet/model.hpp"
#include "barnet/taylor.hpp"

namespace barnet {

// Negative log-likelihood style losses for one target row m. Each per-bin
// term is  f(nu + a.z_t) - z_{t+1,m} (nu + a.z_t)  with f either the exact
// softplus, its degree-q truncation, or the thinning-corrected polynomial
// whose conditional mean over masks equals the truncation on the latent
// process. Sums run over the T-1 usable transitions and are normalized by
// T_eff = T-1. The constant f(0) = log 2 is kept so truncated and exact
// losses are directly comparable and holdout scores are true log-likelihoods.
enum class LossFamily { Complete, Truncated, Unbiased };

struct LossSpec {
  LossFamily family = LossFamily::Complete;
  int degree = 2;          // truncated / unbiased only
  Eigen::VectorXd p_hat;   // unbiased only; size M or 1 (broadcast)
  bool include_intercept = false;

  // Odd degrees add nothing (odd coefficients vanish); the unbiased family
  // normalizes them down to the even equivalent.
  int effective_degree() const;
  void validate(int M) const;
};

// Maximum degree accepted by the generic unbiased evaluator. Beyond this the
// marginal accuracy gain is under ~1e-6 while cost keeps growing.
inline constexpr int kMaxUnbiasedDegree = 12;

// Per-transition active-index lists, shared across rows of one fit.
struct TransitionCache {
  std::vector<std::vector<std::int32_t>> active;  // t = 0 .. T-2
  int t_eff = 0;
  static TransitionCache build(const EventMatrix& data);
};

// Sufficient statistics of the degree-2 losses over the usable transitions:
// s = sum_t z_t, G = sum_t z_t z_t^T, r_m = sum_t z_{t+1,m},
// C(m,.) = sum_t z_{t+1,m} z_t^T.
struct SuffStats {
  Eigen::VectorXd s;
  Eigen::MatrixXd G;
  Eigen::MatrixXd C;
  Eigen::VectorXd r;
  int t_eff = 0;
  static SuffStats build(const EventMatrix& data);
};

// Bound evaluator for one (spec, data, m) triple; the optimizer's hot path.
// Instances hold scratch buffers and are not safe for concurrent use; build
// one per row. Unbiased degree 2 runs on SuffStats in O(M^2) per call, other
// families stream over the transitions.
class RowObjective {
 public:
  RowObjective(const LossSpec& spec, const EventMatrix& data, int m,
               std::shared_ptr<const TransitionCache> cache = nullptr,
               std::shared_ptr<const SuffStats> stats = nullptr,
               bool force_generic = false);

  int dim() const { return m_dim_; }
  int t_eff() const { return t_eff_; }
  double value(const Eigen::VectorXd& a, double intercept) const;
  double value_and_grad(const Eigen::VectorXd& a, double intercept, Eigen::VectorXd& grad_a,
                        double& grad_intercept) const;

 private:
  enum class Mode { Complete, Truncated, UnbiasedDeg2, UnbiasedGeneric };

  double eval(const Eigen::VectorXd& a, double intercept, Eigen::VectorXd* grad_a,
              double* grad_intercept) const;
  double eval_streaming(const Eigen::VectorXd& a, double intercept, Eigen::VectorXd* grad_a,
                        double* grad_intercept) const;
  double eval_deg2(const Eigen::VectorXd& a, double intercept, Eigen::VectorXd* grad_a,
                   double* grad_intercept) const;

  Mode mode_;
  int m_row_ = 0;
  int m_dim_ = 0;
  int t_eff_ = 0;
  int degree_ = 2;
  std::shared_ptr<const TransitionCache> cache_;
  std::shared_ptr<const SuffStats> stats_;
  Eigen::VectorXd target_;  // z_{t+1,m} for t = 0..T-2
  Eigen::VectorXd inv_p_;   // 1/p_hat
  double inv_pm_ = 1.0;
  Eigen::MatrixXd zeta_;  // (degree+1) x M; zeta_(c,j) = zeta_c(1/p_j), see loss.cpp

  // scratch
  mutable Eigen::MatrixXd gamma_, gamma_prime_;
  mutable Eigen::VectorXd g_, bell_, wsum_;
};

// Spec-level entry points. These delegate to RowObjective except where noted.
double loss_complete(const Eigen::VectorXd& a, double intercept, const EventMatrix& x, int m);
double loss_truncated(const Eigen::VectorXd& a, double intercept, const EventMatrix& x, int m,
                      int q);
// Degree-2 closed form evaluated through SuffStats.
double loss_unbiased_deg2(const Eigen::VectorXd& a, double intercept, const EventMatrix& z, int m,
                          const Eigen::VectorXd& p_hat);
// Generic even degree via the partition-sum evaluator (also used for q = 2,
// which gives an independent route to cross-check the closed form).
double loss_unbiased(const Eigen::VectorXd& a, double intercept, const EventMatrix& z, int m,
                     const Eigen::VectorXd& p_hat, int q);

// Direct enumeration of every ordered index tuple per degree, scaling by the
// product of 1/p over distinct indices. Definitionally identical to
// loss_unbiased but shares no code with it; test oracle only.
// Budget: (M+1)^q * T <= 2e7.
double brute_force_unbiased(const Eigen::VectorXd& a, double intercept, const EventMatrix& z,
                            int m, const Eigen::VectorXd& p_hat, int q);

double loss_value(const LossSpec& spec, const Eigen::VectorXd& a, double intercept,
                  const EventMatrix& data, int m);
std::pair<Eigen::VectorXd, double> loss_grad(const LossSpec& spec, const Eigen::VectorXd& a,
                                             double intercept, const EventMatrix& data, int m);

// Broadcasts a scalar or size-1/size-M vector to size M.
Eigen::VectorXd resolve_p_hat(const Eigen::VectorXd& p_hat, int M);

}  // namespace barnet

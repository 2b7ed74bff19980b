#include "barnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "barnet/errors.hpp"

namespace barnet {

namespace {

void warn(const std::string& msg) { std::cerr << "barnet: warning: " << msg << "\n"; }

// Combinatorics for the partition-sum evaluator.
//
// For one time bin with active set A = {j : z_j = 1} (plus the always-on
// intercept coordinate with p = 1), the degree-d contribution of the
// thinning-corrected loss is the sum over ordered index d-tuples of
// prod a_j, with each tuple scaled by 1/p_u per *distinct* index u.
// Grouping tuples by the set partition their equality pattern induces and
// applying Moebius inversion on the partition lattice collapses everything
// onto weighted power sums: with
//   zeta_c(y) = sum_{n=1..c} S2(c,n) (-1)^(n-1) (n-1)! y^n
//   g_c = nu [c=1] + sum_{j in A} a_j^c zeta_c(1/p_j)
// the degree-d sum equals the complete Bell polynomial B_d(g_1..g_d), via
//   B_0 = 1,  B_d = sum_{k=1..d} C(d-1,k-1) g_k B_{d-k}.
// Derivatives reuse dB_d/dg_k = C(d,k) B_{d-k}. The intercept coordinate
// only feeds g_1 because zeta_c(1) = 0 for c >= 2.
struct BellTables {
  static constexpr int kMax = kMaxUnbiasedDegree;
  double binom[kMax + 1][kMax + 1] = {};
  double xi[kMax + 1][kMax + 1] = {};  // xi[c][n] = S2(c,n) (-1)^(n-1) (n-1)!

  BellTables() {
    for (int n = 0; n <= kMax; ++n) {
      binom[n][0] = 1.0;
      for (int k = 1; k <= n; ++k)
        binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0.0);
    }
    double s2[kMax + 1][kMax + 1] = {};
    s2[0][0] = 1.0;
    for (int c = 1; c <= kMax; ++c)
      for (int n = 1; n <= c; ++n) s2[c][n] = n * s2[c - 1][n] + s2[c - 1][n - 1];
    for (int c = 1; c <= kMax; ++c) {
      double fact = 1.0;  // (n-1)!
      for (int n = 1; n <= c; ++n) {
        if (n > 1) fact *= (n - 1);
        s2[c][n] *= ((n % 2 == 1) ? 1.0 : -1.0) * fact;
        xi[c][n] = s2[c][n];
      }
    }
  }

  double zeta(int c, double y) const {
    double acc = 0.0;
    for (int n = c; n >= 1; --n) acc = (acc + xi[c][n]) * y;
    return acc;  // sum xi[c][n] y^n evaluated Horner-style
  }
};

const BellTables& bell_tables() {
  static const BellTables tables;
  return tables;
}

}  // namespace

int LossSpec::effective_degree() const {
  if (family == LossFamily::Complete) return 0;
  return (degree % 2 == 1) ? degree - 1 : degree;
}

void LossSpec::validate(int M) const {
  if (family == LossFamily::Complete) return;
  if (degree < 2) throw ConfigError("LossSpec: degree must be >= 2");
  if (family == LossFamily::Truncated) {
    if (degree > 32) throw ConfigError("LossSpec: truncated degree capped at 32");
    return;
  }
  if (degree > kMaxUnbiasedDegree)
    throw ConfigError("LossSpec: unbiased degree capped at " +
                      std::to_string(kMaxUnbiasedDegree));
  if (degree % 2 == 1)
    warn("odd degree " + std::to_string(degree) + " normalized to " +
         std::to_string(degree - 1) + " (odd terms vanish)");
  Eigen::VectorXd p = resolve_p_hat(p_hat, M);
  if (p.minCoeff() <= 1.0 / M_PI)
    warn("min(p_hat) <= 1/pi: the infinite-degree limit of the corrected loss is not "
         "guaranteed to exist; the finite-degree loss stays well defined");
}

Eigen::VectorXd resolve_p_hat(const Eigen::VectorXd& p_hat, int M) {
  Eigen::VectorXd p;
  if (p_hat.size() == 1) {
    p = Eigen::VectorXd::Constant(M, p_hat[0]);
  } else if (p_hat.size() == M) {
    p = p_hat;
  } else {
    throw ConfigError("p_hat must be scalar or match the node count");
  }
  for (int i = 0; i < M; ++i) {
    if (!(p[i] > 0.0) || p[i] > 1.0) throw ConfigError("p_hat entries must lie in (0,1]");
  }
  return p;
}

TransitionCache TransitionCache::build(const EventMatrix& data) {
  data.validate();
  if (data.bins() < 2) throw ConfigError("fitting needs at least 2 time bins");
  TransitionCache cache;
  cache.t_eff = data.bins() - 1;
  cache.active.resize(cache.t_eff);
  for (int t = 0; t < cache.t_eff; ++t) {
    auto& act = cache.active[t];
    for (int i = 0; i < data.nodes(); ++i) {
      if (data.data(i, t)) act.push_back(i);
    }
  }
  return cache;
}

SuffStats SuffStats::build(const EventMatrix& data) {
  data.validate();
  if (data.bins() < 2) throw ConfigError("fitting needs at least 2 time bins");
  SuffStats st;
  st.t_eff = data.bins() - 1;
  Eigen::MatrixXd zd = data.data.cast<double>();
  Eigen::MatrixXd past = zd.leftCols(st.t_eff);
  Eigen::MatrixXd next = zd.rightCols(st.t_eff);
  st.s = past.rowwise().sum();
  st.G = past * past.transpose();
  st.C = next * past.transpose();
  st.r = next.rowwise().sum();
  return st;
}

RowObjective::RowObjective(const LossSpec& spec, const EventMatrix& data, int m,
                           std::shared_ptr<const TransitionCache> cache,
                           std::shared_ptr<const SuffStats> stats, bool force_generic)
    : m_row_(m), m_dim_(data.nodes()), degree_(spec.effective_degree()) {
  if (m < 0 || m >= data.nodes()) throw ConfigError("RowObjective: row index out of range");
  switch (spec.family) {
    case LossFamily::Complete:
      mode_ = Mode::Complete;
      break;
    case LossFamily::Truncated:
      mode_ = Mode::Truncated;
      if (degree_ < 2 || degree_ > 32) throw ConfigError("RowObjective: bad truncation degree");
      break;
    case LossFamily::Unbiased:
      if (degree_ < 2 || degree_ > kMaxUnbiasedDegree)
        throw ConfigError("RowObjective: bad unbiased degree");
      mode_ = (degree_ == 2 && !force_generic) ? Mode::UnbiasedDeg2 : Mode::UnbiasedGeneric;
      break;
  }

  if (mode_ == Mode::UnbiasedDeg2) {
    stats_ = stats ? std::move(stats) : std::make_shared<const SuffStats>(SuffStats::build(data));
    t_eff_ = stats_->t_eff;
  } else {
    cache_ = cache ? std::move(cache)
                   : std::make_shared<const TransitionCache>(TransitionCache::build(data));
    t_eff_ = cache_->t_eff;
    target_.resize(t_eff_);
    for (int t = 0; t < t_eff_; ++t) target_[t] = data.data(m, t + 1);
  }

  if (spec.family == LossFamily::Unbiased) {
    Eigen::VectorXd p = resolve_p_hat(spec.p_hat, m_dim_);
    inv_p_ = p.cwiseInverse();
    inv_pm_ = 1.0 / p[m];
    if (mode_ == Mode::UnbiasedGeneric) {
      const auto& bt = bell_tables();
      zeta_.resize(degree_ + 1, m_dim_);
      for (int j = 0; j < m_dim_; ++j)
        for (int c = 1; c <= degree_; ++c) zeta_(c, j) = bt.zeta(c, inv_p_[j]);
      gamma_.resize(degree_ + 1, m_dim_);
      gamma_prime_.resize(degree_ + 1, m_dim_);
      g_.resize(degree_ + 1);
      bell_.resize(degree_ + 1);
      wsum_.resize(degree_ + 1);
    }
  }
}

double RowObjective::value(const Eigen::VectorXd& a, double intercept) const {
  return eval(a, intercept, nullptr, nullptr);
}

double RowObjective::value_and_grad(const Eigen::VectorXd& a, double intercept,
                                    Eigen::VectorXd& grad_a, double& grad_intercept) const {
  return eval(a, intercept, &grad_a, &grad_intercept);
}

double RowObjective::eval(const Eigen::VectorXd& a, double intercept, Eigen::VectorXd* grad_a,
                          double* grad_intercept) const {
  if (a.size() != m_dim_) throw ConfigError("RowObjective: weight vector dimension mismatch");
  if (grad_a) {
    grad_a->setZero(m_dim_);
    *grad_intercept = 0.0;
  }
  if (mode_ == Mode::UnbiasedDeg2) return eval_deg2(a, intercept, grad_a, grad_intercept);
  return eval_streaming(a, intercept, grad_a, grad_intercept);
}

double RowObjective::eval_streaming(const Eigen::VectorXd& a, double intercept,
                                    Eigen::VectorXd* grad_a, double* grad_intercept) const {
  const auto& coeff = CoeffTable::cached();
  const auto& active = cache_->active;
  double total = 0.0;

  if (mode_ == Mode::Complete || mode_ == Mode::Truncated) {
    const bool complete = (mode_ == Mode::Complete);
    for (int t = 0; t < t_eff_; ++t) {
      double y = intercept;
      for (int j : active[t]) y += a[j];
      const double tt = target_[t];
      total += (complete ? softplus(y) : softplus_truncated(y, degree_, coeff)) - tt * y;
      if (grad_a) {
        const double r =
            (complete ? sigmoid(y) : softplus_truncated_deriv(y, degree_, coeff)) - tt;
        for (int j : active[t]) (*grad_a)[j] += r;
        *grad_intercept += r;
      }
    }
  } else {
    const auto& bt = bell_tables();
    const int q = degree_;
    // Per-coordinate power-sum contributions; fixed over t.
    for (int j = 0; j < m_dim_; ++j) {
      double pw = 1.0;  // a_j^(c-1)
      for (int c = 1; c <= q; ++c) {
        gamma_prime_(c, j) = c * pw * zeta_(c, j);
        pw *= a[j];
        gamma_(c, j) = pw * zeta_(c, j);
      }
    }
    for (int t = 0; t < t_eff_; ++t) {
      const auto& act = active[t];
      for (int c = 1; c <= q; ++c) g_[c] = 0.0;
      g_[1] = intercept;
      for (int j : act)
        for (int c = 1; c <= q; ++c) g_[c] += gamma_(c, j);

      bell_[0] = 1.0;
      for (int d = 1; d <= q; ++d) {
        double acc = 0.0;
        for (int k = 1; k <= d; ++k) acc += bt.binom[d - 1][k - 1] * g_[k] * bell_[d - k];
        bell_[d] = acc;
      }
      double val = 0.0;
      for (int d = 2; d <= q; d += 2) val += coeff[d] * bell_[d];
      val += coeff[1] * bell_[1];

      const double tt = target_[t];
      if (tt != 0.0) {
        double lin = intercept;
        for (int j : act) lin += a[j] * inv_p_[j];
        val -= tt * lin * inv_pm_;
      }
      total += val;

      if (grad_a) {
        for (int k = 1; k <= q; ++k) {
          double acc = 0.0;
          for (int d = k; d <= q; ++d) acc += coeff[d] * bt.binom[d][k] * bell_[d - k];
          wsum_[k] = acc;
        }
        for (int j : act) {
          double s = 0.0;
          for (int c = 1; c <= q; ++c) s += wsum_[c] * gamma_prime_(c, j);
          (*grad_a)[j] += s - tt * inv_pm_ * inv_p_[j];
        }
        *grad_intercept += wsum_[1] - tt * inv_pm_;
      }
    }
  }

  const double norm = 1.0 / t_eff_;
  if (grad_a) {
    *grad_a *= norm;
    *grad_intercept *= norm;
  }
  // complete/truncated carry f(0) inside f itself; the partition-sum path
  // accumulates degrees >= 1 only
  if (mode_ == Mode::UnbiasedGeneric) total += coeff[0] * t_eff_;
  return total * norm;
}

double RowObjective::eval_deg2(const Eigen::VectorXd& a, double intercept,
                               Eigen::VectorXd* grad_a, double* grad_intercept) const {
  const auto& coeff = CoeffTable::cached();
  const double c1 = coeff[1], c2 = coeff[2];
  const SuffStats& st = *stats_;
  const double norm = 1.0 / t_eff_;

  Eigen::VectorXd at = a.cwiseProduct(inv_p_);           // a_i / p_i
  Eigen::VectorXd a2s = a.array().square().matrix();     // a_i^2
  const double lin = at.dot(st.s);                       // sum a_i s_i / p_i
  Eigen::VectorXd Gat = st.G * at;
  const double quad_distinct = at.dot(Gat) - a2s.dot(st.s.cwiseProduct(inv_p_.cwiseAbs2()));
  const double quad_repeat = a2s.dot(st.s.cwiseProduct(inv_p_));
  const double cross = a.dot(st.C.row(m_row_).transpose().cwiseProduct(inv_p_)) * inv_pm_;

  double value = coeff[0] + c1 * intercept + c2 * intercept * intercept +
                 norm * ((c1 + 2.0 * c2 * intercept) * lin + c2 * (quad_distinct + quad_repeat) -
                         intercept * st.r[m_row_] * inv_pm_ - cross);

  if (grad_a) {
    for (int j = 0; j < m_dim_; ++j) {
      double g = (c1 + 2.0 * c2 * intercept) * st.s[j] * inv_p_[j] +
                 c2 * (2.0 * Gat[j] * inv_p_[j] - 2.0 * a[j] * st.s[j] * inv_p_[j] * inv_p_[j] +
                       2.0 * a[j] * st.s[j] * inv_p_[j]) -
                 st.C(m_row_, j) * inv_pm_ * inv_p_[j];
      (*grad_a)[j] = g * norm;
    }
    *grad_intercept =
        c1 + 2.0 * c2 * intercept + norm * (2.0 * c2 * lin - st.r[m_row_] * inv_pm_);
  }
  return value;
}

double loss_complete(const Eigen::VectorXd& a, double intercept, const EventMatrix& x, int m) {
  LossSpec spec;
  spec.family = LossFamily::Complete;
  RowObjective obj(spec, x, m);
  return obj.value(a, intercept);
}

double loss_truncated(const Eigen::VectorXd& a, double intercept, const EventMatrix& x, int m,
                      int q) {
  LossSpec spec;
  spec.family = LossFamily::Truncated;
  spec.degree = q;
  spec.validate(x.nodes());
  if (a.lpNorm<1>() + std::abs(intercept) > 1.0 + 1e-9)
    warn("||a||_1 + |intercept| > 1: outside the expansion's recommended validity region");
  RowObjective obj(spec, x, m);
  return obj.value(a, intercept);
}

double loss_unbiased_deg2(const Eigen::VectorXd& a, double intercept, const EventMatrix& z, int m,
                          const Eigen::VectorXd& p_hat) {
  LossSpec spec;
  spec.family = LossFamily::Unbiased;
  spec.degree = 2;
  spec.p_hat = p_hat;
  spec.validate(z.nodes());
  RowObjective obj(spec, z, m);
  return obj.value(a, intercept);
}

double loss_unbiased(const Eigen::VectorXd& a, double intercept, const EventMatrix& z, int m,
                     const Eigen::VectorXd& p_hat, int q) {
  LossSpec spec;
  spec.family = LossFamily::Unbiased;
  spec.degree = q;
  spec.p_hat = p_hat;
  spec.validate(z.nodes());
  RowObjective obj(spec, z, m, nullptr, nullptr, /*force_generic=*/true);
  return obj.value(a, intercept);
}

double brute_force_unbiased(const Eigen::VectorXd& a, double intercept, const EventMatrix& z,
                            int m, const Eigen::VectorXd& p_hat, int q) {
  z.validate();
  if (z.bins() < 2) throw ConfigError("brute_force_unbiased: needs at least 2 bins");
  const int M = z.nodes();
  if (a.size() != M) throw ConfigError("brute_force_unbiased: dimension mismatch");
  if (q % 2 == 1) q -= 1;
  if (q < 2 || q > kMaxUnbiasedDegree) throw ConfigError("brute_force_unbiased: bad degree");
  Eigen::VectorXd p = resolve_p_hat(p_hat, M);
  const int t_eff = z.bins() - 1;
  double tuples = std::pow(static_cast<double>(M + 1), q) * t_eff;
  if (tuples > 2e7) throw DataError("brute_force_unbiased: enumeration budget exceeded");

  const auto& coeff = CoeffTable::cached();
  double total = 0.0;
  std::vector<int> tuple;
  std::vector<int> uniq;
  for (int t = 0; t < t_eff; ++t) {
    double acc = 0.0;
    for (int d = 1; d <= q; ++d) {
      if (coeff[d] == 0.0) continue;
      tuple.assign(d, 0);
      while (true) {
        // Coordinate 0 is the always-observed intercept (a value = intercept,
        // z = 1, p = 1); coordinates 1..M map to node indices 0..M-1.
        double prod_a = 1.0;
        for (int pos : tuple) prod_a *= (pos == 0) ? intercept : a[pos - 1];
        if (prod_a != 0.0) {
          uniq.assign(tuple.begin(), tuple.end());
          std::sort(uniq.begin(), uniq.end());
          uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
          double prod_z = 1.0, prod_p = 1.0;
          for (int u : uniq) {
            if (u == 0) continue;
            prod_z *= z.data(u - 1, t);
            prod_p *= p[u - 1];
          }
          acc += coeff[d] * prod_a * prod_z / prod_p;
        }
        int pos = d - 1;
        while (pos >= 0 && tuple[pos] == M) tuple[pos--] = 0;
        if (pos < 0) break;
        ++tuple[pos];
      }
    }
    const double tt = z.data(m, t + 1);
    if (tt != 0.0) {
      double lin = intercept;
      for (int i = 0; i < M; ++i) lin += a[i] * z.data(i, t) / p[i];
      acc -= tt * lin / p[m];
    }
    total += acc;
  }
  return total / t_eff + coeff[0];
}

double loss_value(const LossSpec& spec, const Eigen::VectorXd& a, double intercept,
                  const EventMatrix& data, int m) {
  RowObjective obj(spec, data, m);
  return obj.value(a, intercept);
}

std::pair<Eigen::VectorXd, double> loss_grad(const LossSpec& spec, const Eigen::VectorXd& a,
                                             double intercept, const EventMatrix& data, int m) {
  RowObjective obj(spec, data, m);
  Eigen::VectorXd ga(a.size());
  double gi = 0.0;
  obj.value_and_grad(a, intercept, ga, gi);
  return {std::move(ga), gi};
}

}  // namespace barnet

#include "barnet/filter.hpp"

#include <cmath>

#include "barnet/errors.hpp"
#include "barnet/rng.hpp"

namespace barnet {

void FilterConfig::validate(int m) const {
  if (n_particles < 1) throw ConfigError("FilterConfig: n_particles must be >= 1");
  if (!(resample_threshold > 0.0 && resample_threshold <= 1.0))
    throw ConfigError("FilterConfig: resample_threshold must lie in (0,1]");
  obs.validate();
  if (obs.p_hat.size() != m)
    throw ConfigError("FilterConfig: observation model dimension mismatch");
  if (x0.size() != 0 && x0.size() != m) throw ConfigError("FilterConfig: x0 dimension mismatch");
}

FilterOutput filter_predict(const NetworkModel& model, const EventMatrix& z,
                            const FilterConfig& cfg) {
  model.validate();
  z.validate();
  const int M = model.dim();
  if (z.nodes() != M) throw ConfigError("filter_predict: model/observation dimension mismatch");
  cfg.validate(M);
  const int T = z.bins();
  const int N = cfg.n_particles;
  const Eigen::VectorXd& p = cfg.obs.p_hat;

  Eigen::MatrixXd states(M, N);  // particle latent states, 0/1
  if (cfg.x0.size() == 0) {
    states.setZero();
  } else {
    states = cfg.x0.replicate(1, N);
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(N, 1.0 / N);

  FilterOutput out;
  out.predictive.resize(M, T);
  out.ess_trace.resize(T);

  Rng rng(cfg.seed);
  Eigen::MatrixXd probs(M, N);
  Eigen::MatrixXd resampled(M, N);

  for (int n = 0; n < T; ++n) {
    // One-step event probabilities per particle; the weighted mixture is the
    // predictive before z_n is seen.
    probs = model.A * states;
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < M; ++i) probs(i, k) = sigmoid(probs(i, k) + model.nu[i]);
    out.predictive.col(n) = probs * weights;

    // Propagate.
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < M; ++i) states(i, k) = rng.bernoulli(probs(i, k)) ? 1.0 : 0.0;

    // Weight by the thinning likelihood.
    auto obs_weight = [&](int k) {
      double w = 1.0;
      for (int i = 0; i < M; ++i) {
        if (z.data(i, n)) {
          w *= (states(i, k) == 1.0) ? p[i] : 0.0;
        } else if (states(i, k) == 1.0) {
          w *= 1.0 - p[i];
        }
      }
      return w;
    };
    double total = 0.0;
    for (int k = 0; k < N; ++k) {
      weights[k] *= obs_weight(k);
      total += weights[k];
    }

    if (total == 0.0) {
      // Every particle contradicts z_n. Force the deterministic coordinates
      // (z=1 implies x=1; z=0 with p=1 implies x=0) and reweight.
      ++out.reinjections;
      for (int i = 0; i < M; ++i) {
        if (z.data(i, n)) {
          states.row(i).setOnes();
        } else if (p[i] >= 1.0) {
          states.row(i).setZero();
        }
      }
      total = 0.0;
      for (int k = 0; k < N; ++k) {
        weights[k] = obs_weight(k);
        total += weights[k];
      }
    }

    weights /= total;
    const double ess = 1.0 / weights.squaredNorm();
    out.ess_trace[n] = ess;

    if (ess < cfg.resample_threshold * N) {
      const double u = rng.uniform();
      double cum = weights[0];
      int src = 0;
      for (int k = 0; k < N; ++k) {
        const double pos = (u + k) / N;
        while (cum < pos && src + 1 < N) cum += weights[++src];
        resampled.col(k) = states.col(src);
      }
      states.swap(resampled);
      weights.setConstant(1.0 / N);
    }
  }

  out.expected_event_total = out.predictive.sum();
  return out;
}

double expected_events(const FilterOutput& out, double scale) {
  if (scale <= 0) throw ConfigError("expected_events: scale must be positive");
  return out.predictive.sum() / scale;
}

}  // namespace barnet

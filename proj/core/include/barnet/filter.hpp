#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "barnet/model.hpp"

namespace barnet {

struct FilterConfig {
  int n_particles = 1000;
  // Observation model of the thinning channel; the filter reads p_hat.
  MissingnessSpec obs;
  double resample_threshold = 0.5;  // resample when ESS < threshold * N
  std::uint64_t seed = 0;
  Eigen::VectorXd x0;  // initial latent state; zeros when empty

  void validate(int m) const;
};

struct FilterOutput {
  // predictive(i, n) = P(X_{n,i} = 1 | observations before n), in [0,1].
  Eigen::MatrixXd predictive;
  Eigen::VectorXd ess_trace;
  double expected_event_total = 0.0;
  // Steps where every particle contradicted the observation and states were
  // forced to the only consistent value.
  int reinjections = 0;
};

// Bootstrap filter: particles propagate through the event dynamics, are
// weighted by the thinning likelihood P(z | x) (z=1 requires x=1 and carries
// weight p; z=0 carries 1-p if x=1, else 1), and are systematically resampled
// when the effective sample size drops below the threshold. Column n of the
// output is the weighted mixture of event probabilities given particles
// conditioned on observations up to n-1 only.
FilterOutput filter_predict(const NetworkModel& model, const EventMatrix& z,
                            const FilterConfig& cfg);

// Total of the predictive matrix, divided by `scale`. scale < 1 implements
// the constant-correction baseline for a filter run with p_hat = 1.
double expected_events(const FilterOutput& out, double scale = 1.0);

}  // namespace barnet

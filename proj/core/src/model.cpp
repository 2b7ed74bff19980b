#include "barnet/model.hpp"

#include <cmath>
#include <limits>

#include "barnet/errors.hpp"
#include "barnet/rng.hpp"

namespace barnet {

bool NetworkModel::rows_in_ball(double radius, double tol) const {
  for (int m = 0; m < A.rows(); ++m) {
    if (A.row(m).lpNorm<1>() > radius + tol) return false;
  }
  return true;
}

void NetworkModel::validate() const {
  if (A.rows() != A.cols()) throw ConfigError("NetworkModel: A must be square");
  if (nu.size() != A.rows()) throw ConfigError("NetworkModel: nu length must match A dimension");
  if (!A.allFinite() || !nu.allFinite()) throw ConfigError("NetworkModel: non-finite entries");
  if (ball_constrained && !rows_in_ball())
    throw ConfigError("NetworkModel: ball_constrained set but a row exceeds the l1 ball");
}

std::vector<std::string> EventMatrix::default_node_ids(int m) {
  std::vector<std::string> ids;
  ids.reserve(m);
  for (int i = 0; i < m; ++i) ids.push_back("n" + std::to_string(i));
  return ids;
}

EventMatrix EventMatrix::zeros(int m, int t) {
  EventMatrix out;
  out.data = BinaryMatrix::Zero(m, t);
  out.node_ids = default_node_ids(m);
  return out;
}

void EventMatrix::validate() const {
  if (static_cast<int>(node_ids.size()) != nodes())
    throw ConfigError("EventMatrix: node_ids length must equal row count");
  for (int t = 0; t < bins(); ++t) {
    for (int i = 0; i < nodes(); ++i) {
      if (data(i, t) > 1) throw ConfigError("EventMatrix: cells must be 0 or 1");
    }
  }
}

MissingnessSpec MissingnessSpec::scalar(double p, double p_hat, int m) {
  MissingnessSpec spec;
  spec.p = Eigen::VectorXd::Constant(m, p);
  spec.p_hat = Eigen::VectorXd::Constant(m, p_hat);
  spec.validate();
  return spec;
}

MissingnessSpec MissingnessSpec::exact(Eigen::VectorXd p) {
  MissingnessSpec spec;
  spec.p = p;
  spec.p_hat = std::move(p);
  spec.validate();
  return spec;
}

bool MissingnessSpec::below_theory_threshold() const {
  return p_hat.size() > 0 && p_hat.minCoeff() <= 1.0 / M_PI;
}

void MissingnessSpec::validate() const {
  auto check = [](const Eigen::VectorXd& v, const char* name) {
    for (int i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0) || v[i] > 1.0)
        throw ConfigError(std::string("MissingnessSpec: ") + name + " entries must lie in (0,1]");
    }
  };
  check(p, "p");
  check(p_hat, "p_hat");
  if (p.size() != p_hat.size())
    throw ConfigError("MissingnessSpec: p and p_hat must have equal length");
}

double sigmoid(double x) {
  // Sign-split keeps exp() in the underflow-safe range for |x| up to ~700.
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

EventMatrix simulate_bar(const NetworkModel& model, int T, std::uint64_t seed,
                         const Eigen::VectorXd& x0, int burn_in) {
  model.validate();
  if (T < 1) throw ConfigError("simulate_bar: T must be >= 1");
  if (burn_in < 0) throw ConfigError("simulate_bar: burn_in must be >= 0");
  const int m = model.dim();
  Eigen::VectorXd state;
  if (x0.size() == 0) {
    state = Eigen::VectorXd::Zero(m);
  } else {
    if (x0.size() != m) throw ConfigError("simulate_bar: x0 length must match model dimension");
    state = x0;
  }

  EventMatrix out;
  out.data.resize(m, T);
  out.node_ids = EventMatrix::default_node_ids(m);

  Rng rng(seed);
  Eigen::VectorXd logits(m);
  for (int t = -burn_in; t < T; ++t) {
    logits = model.nu + model.A * state;
    for (int i = 0; i < m; ++i) {
      state[i] = rng.bernoulli(sigmoid(logits[i])) ? 1.0 : 0.0;
      if (t >= 0) out.data(i, t) = static_cast<std::uint8_t>(state[i]);
    }
  }
  return out;
}

std::pair<EventMatrix, EventMatrix> apply_missingness(const EventMatrix& x,
                                                      const MissingnessSpec& spec,
                                                      std::uint64_t seed) {
  spec.validate();
  if (spec.p.size() != x.nodes())
    throw ConfigError("apply_missingness: spec dimension must match event matrix");
  EventMatrix z = x;
  EventMatrix w = x;
  Rng rng(seed);
  for (int t = 0; t < x.bins(); ++t) {
    for (int i = 0; i < x.nodes(); ++i) {
      std::uint8_t keep = rng.bernoulli(spec.p[i]) ? 1 : 0;
      w.data(i, t) = keep;
      z.data(i, t) = static_cast<std::uint8_t>(keep & x.data(i, t));
    }
  }
  return {std::move(z), std::move(w)};
}

}  // namespace barnet

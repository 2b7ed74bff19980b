#pragma once

#include <Eigen/Dense>
#include <functional>

#include "barnet/loss.hpp"
#include "barnet/model.hpp"
#include "barnet/rng.hpp"

namespace barnet::test {

inline EventMatrix random_events(int m, int t, double density, Rng& rng) {
  EventMatrix e = EventMatrix::zeros(m, t);
  for (int tt = 0; tt < t; ++tt)
    for (int i = 0; i < m; ++i) e.data(i, tt) = rng.bernoulli(density) ? 1 : 0;
  return e;
}

inline Eigen::VectorXd random_ball_point(int m, double radius, Rng& rng) {
  Eigen::VectorXd e(m);
  for (int i = 0; i < m; ++i) e[i] = rng.exponential();
  const double total = e.sum() + rng.exponential();
  for (int i = 0; i < m; ++i) e[i] = (rng.bernoulli(0.5) ? 1.0 : -1.0) * radius * e[i] / total;
  return e;
}

// Exact expectation over every thinning mask of an M x T matrix:
// sum_W P(W) fn(W .* X). Feasible for M*T <= ~16.
inline double expect_over_masks(const EventMatrix& x, const Eigen::VectorXd& p,
                                const std::function<double(const EventMatrix&)>& fn) {
  const int m = x.nodes();
  const int t = x.bins();
  const int cells = m * t;
  double acc = 0.0;
  for (long mask = 0; mask < (1L << cells); ++mask) {
    double weight = 1.0;
    EventMatrix z = x;
    for (int c = 0; c < cells; ++c) {
      const int i = c % m;
      const int tt = c / m;
      const bool keep = (mask >> c) & 1;
      weight *= keep ? p[i] : 1.0 - p[i];
      if (!keep) z.data(i, tt) = 0;
    }
    acc += weight * fn(z);
  }
  return acc;
}

// Central finite differences of a row loss in (a, intercept).
inline void finite_diff_grad(const std::function<double(const Eigen::VectorXd&, double)>& f,
                             const Eigen::VectorXd& a, double intercept, double h,
                             Eigen::VectorXd& ga, double& gi) {
  ga.resize(a.size());
  for (int i = 0; i < a.size(); ++i) {
    Eigen::VectorXd ap = a, am = a;
    ap[i] += h;
    am[i] -= h;
    ga[i] = (f(ap, intercept) - f(am, intercept)) / (2 * h);
  }
  gi = (f(a, intercept + h) - f(a, intercept - h)) / (2 * h);
}

}  // namespace barnet::test

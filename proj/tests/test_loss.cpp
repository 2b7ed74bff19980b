#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "barnet/errors.hpp"
#include "barnet/loss.hpp"
#include "barnet/rng.hpp"
#include "support/helpers.hpp"

using namespace barnet;
using namespace barnet::test;

namespace {

EventMatrix hand_case_matrix() {
  // columns: t=0 -> (1,0), t=1 -> (1,0); target row 0 fires at t=1
  EventMatrix e = EventMatrix::zeros(2, 2);
  e.data(0, 0) = 1;
  e.data(0, 1) = 1;
  return e;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd scalar_p(double p) {
  Eigen::VectorXd v(1);
  v << p;
  return v;
}

}  // namespace

TEST_CASE("complete loss: zero weights give log 2 on any data") {
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    EventMatrix x = random_events(4, 12, 0.5, rng);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(4);
    CHECK(loss_complete(a, 0.0, x, rep % 4) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("complete loss: one-transition hand case") {
  EventMatrix x = hand_case_matrix();
  const double expected = softplus(0.5) - 0.5;  // 0.474077...
  CHECK(loss_complete(vec2(0.5, -0.3), 0.0, x, 0) == doctest::Approx(expected).epsilon(1e-15));

  // mirrored case: negated weights, target cell zeroed -> f(-0.5) = f(0.5) - 0.5
  EventMatrix x2 = x;
  x2.data(0, 1) = 0;
  CHECK(loss_complete(vec2(-0.5, 0.3), 0.0, x2, 0) ==
        doctest::Approx(softplus(-0.5)).epsilon(1e-15));
  CHECK(softplus(-0.5) == doctest::Approx(softplus(0.5) - 0.5).epsilon(1e-15));
}

TEST_CASE("truncated loss: hand case at degree 2") {
  EventMatrix x = hand_case_matrix();
  const double expected = std::log(2.0) + 0.25 + 0.03125 - 0.5;
  CHECK(loss_truncated(vec2(0.5, -0.3), 0.0, x, 0, 2) ==
        doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("truncated loss approaches the complete loss at rate 2 pi^-q") {
  Rng rng(7);
  EventMatrix x = random_events(6, 30, 0.5, rng);
  for (int q : {2, 4, 6, 8}) {
    const double bound = 2.0 * std::pow(M_PI, -q);
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd a = random_ball_point(6, 1.0, rng);
      const int m = rep % 6;
      CHECK(std::abs(loss_truncated(a, 0.0, x, m, q) - loss_complete(a, 0.0, x, m)) <= bound);
    }
  }
}

TEST_CASE("odd truncation equals the even one below it") {
  Rng rng(11);
  EventMatrix x = random_events(5, 20, 0.4, rng);
  Eigen::VectorXd a = random_ball_point(5, 1.0, rng);
  CHECK(loss_truncated(a, 0.1, x, 2, 3) == loss_truncated(a, 0.1, x, 2, 2));
  CHECK(loss_truncated(a, 0.1, x, 2, 5) == loss_truncated(a, 0.1, x, 2, 4));
}

TEST_CASE("corrected loss: closed-form hand case") {
  EventMatrix z = hand_case_matrix();
  const double expected = std::log(2.0) - 1.4375;
  CHECK(loss_unbiased_deg2(vec2(0.5, -0.3), 0.0, z, 0, scalar_p(0.5)) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(brute_force_unbiased(vec2(0.5, -0.3), 0.0, z, 0, scalar_p(0.5), 2) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(loss_unbiased(vec2(0.5, -0.3), 0.0, z, 0, scalar_p(0.5), 2) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("p_hat = 1 reduces every route to the plain truncation") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    EventMatrix z = random_events(4, 10, 0.5, rng);
    Eigen::VectorXd a = random_ball_point(4, 1.0, rng);
    const double nu = rng.uniform(-0.3, 0.3);
    const int m = rep % 4;
    for (int q : {2, 4}) {
      const double trunc = loss_truncated(a, nu, z, m, q);
      CHECK(loss_unbiased(a, nu, z, m, scalar_p(1.0), q) ==
            doctest::Approx(trunc).epsilon(1e-12));
      CHECK(brute_force_unbiased(a, nu, z, m, scalar_p(1.0), q) ==
            doctest::Approx(trunc).epsilon(1e-12));
      if (q == 2)
        CHECK(loss_unbiased_deg2(a, nu, z, m, scalar_p(1.0)) ==
              doctest::Approx(trunc).epsilon(1e-12));
    }
  }
}

TEST_CASE("generic evaluator equals the closed form at degree 2") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const int m_nodes = 2 + rng.uniform_int(5);
    const int t = 2 + rng.uniform_int(7);
    EventMatrix z = random_events(m_nodes, t, 0.5, rng);
    Eigen::VectorXd a = random_ball_point(m_nodes, 1.0, rng);
    Eigen::VectorXd p(m_nodes);
    for (int i = 0; i < m_nodes; ++i) p[i] = rng.uniform(0.4, 1.0);
    const double nu = rng.bernoulli(0.5) ? rng.uniform(-0.3, 0.3) : 0.0;
    const int m = rng.uniform_int(m_nodes);
    CHECK(loss_unbiased(a, nu, z, m, p, 2) ==
          doctest::Approx(loss_unbiased_deg2(a, nu, z, m, p)).epsilon(1e-12));
  }
}

TEST_CASE("generic evaluator equals brute force enumeration") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const int m_nodes = 2 + rng.uniform_int(4);
    const int t = 2 + rng.uniform_int(5);
    EventMatrix z = random_events(m_nodes, t, 0.6, rng);
    Eigen::VectorXd a = random_ball_point(m_nodes, 1.0, rng);
    Eigen::VectorXd p(m_nodes);
    for (int i = 0; i < m_nodes; ++i) p[i] = rng.uniform(0.4, 1.0);
    const double nu = rng.bernoulli(0.5) ? rng.uniform(-0.3, 0.3) : 0.0;
    const int m = rng.uniform_int(m_nodes);
    for (int q : {2, 4, 6}) {
      CHECK(loss_unbiased(a, nu, z, m, p, q) ==
            doctest::Approx(brute_force_unbiased(a, nu, z, m, p, q)).epsilon(1e-10));
    }
  }
}

TEST_CASE("generic evaluator stays exact at the degree cap") {
  Rng rng(59);
  for (int q : {10, 12}) {
    for (int rep = 0; rep < 5; ++rep) {
      EventMatrix z = random_events(2, 8, 0.6, rng);
      Eigen::VectorXd a = random_ball_point(2, 1.0, rng);
      Eigen::VectorXd p = Eigen::VectorXd::Constant(2, rep % 2 ? 0.4 : 0.7);
      const double fast = loss_unbiased(a, 0.1, z, 0, p, q);
      const double slow = brute_force_unbiased(a, 0.1, z, 0, p, q);
      CHECK(std::abs(fast - slow) <= 1e-10);
    }
  }
}

TEST_CASE("single-node brute force reduction") {
  // With one node the degree-d term collapses to c_d a^d z_t / p.
  EventMatrix z = EventMatrix::zeros(1, 3);
  z.data(0, 0) = 1;
  z.data(0, 2) = 1;
  Eigen::VectorXd a(1);
  a << 0.7;
  const double p = 0.6;
  const auto& ct = CoeffTable::cached();
  double expected = 0.0;
  for (int t = 0; t < 2; ++t) {
    const double zt = z.data(0, t);
    for (int d = 1; d <= 4; ++d) expected += ct[d] * std::pow(0.7, d) * zt / p;
    expected -= z.data(0, t + 1) * (0.7 * zt) / (p * p);
  }
  expected = expected / 2 + ct[0];
  CHECK(brute_force_unbiased(a, 0.0, z, 0, scalar_p(p), 4) ==
        doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("closed form is mask-unbiased on the 16-mask grid") {
  Rng rng(97);
  EventMatrix x = random_events(2, 2, 0.7, rng);
  x.data(0, 0) = 1;  // keep at least one active cell
  Eigen::VectorXd a = random_ball_point(2, 1.0, rng);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 0.5);
  const double averaged = expect_over_masks(
      x, p, [&](const EventMatrix& z) { return loss_unbiased_deg2(a, 0.0, z, 0, p); });
  CHECK(averaged == doctest::Approx(loss_truncated(a, 0.0, x, 0, 2)).epsilon(1e-12));
}

TEST_CASE("exact unbiasedness over every mask") {
  Rng rng(13);
  // small grids keep the 2^(M T) enumeration exact
  for (double p : {0.4, 0.6, 0.75}) {
    for (int rep = 0; rep < 4; ++rep) {
      const int m_nodes = 2;
      const int t = 3;
      EventMatrix x = random_events(m_nodes, t, 0.6, rng);
      Eigen::VectorXd a = random_ball_point(m_nodes, 1.0, rng);
      const double nu = rep % 2 ? 0.2 : 0.0;
      const int m = rng.uniform_int(m_nodes);
      Eigen::VectorXd pv = Eigen::VectorXd::Constant(m_nodes, p);
      for (int q : {2, 4}) {
        const double averaged = expect_over_masks(x, pv, [&](const EventMatrix& z) {
          return loss_unbiased(a, nu, z, m, pv, q);
        });
        CHECK(averaged == doctest::Approx(loss_truncated(a, nu, x, m, q)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("exact unbiasedness with per-node probabilities") {
  Rng rng(17);
  EventMatrix x = random_events(3, 3, 0.6, rng);
  Eigen::VectorXd a = random_ball_point(3, 1.0, rng);
  Eigen::VectorXd p(3);
  p << 0.4, 0.7, 1.0;
  const double averaged = expect_over_masks(
      x, p, [&](const EventMatrix& z) { return loss_unbiased(a, 0.0, z, 1, p, 4); });
  CHECK(averaged == doctest::Approx(loss_truncated(a, 0.0, x, 1, 4)).epsilon(1e-10));
}

TEST_CASE("gradients: hand case at zero weights") {
  EventMatrix x = hand_case_matrix();
  LossSpec spec;
  spec.family = LossFamily::Complete;
  auto [ga, gi] = loss_grad(spec, Eigen::VectorXd::Zero(2), 0.0, x, 0);
  CHECK(ga[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(ga[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(gi == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("gradients match central finite differences for every family") {
  Rng rng(23);
  int done = 0;
  while (done < 50) {
    const int m_nodes = 2 + rng.uniform_int(5);
    const int t = 3 + rng.uniform_int(10);
    EventMatrix data = random_events(m_nodes, t, 0.5, rng);
    Eigen::VectorXd a = random_ball_point(m_nodes, 0.9, rng);
    const double nu = rng.uniform(-0.2, 0.2);
    const int m = rng.uniform_int(m_nodes);

    LossSpec spec;
    spec.include_intercept = true;
    const int pick = done % 5;
    if (pick == 0) {
      spec.family = LossFamily::Complete;
    } else if (pick == 1) {
      spec.family = LossFamily::Truncated;
      spec.degree = 2 + 2 * rng.uniform_int(3);
    } else {
      spec.family = LossFamily::Unbiased;
      spec.degree = (pick == 2) ? 2 : 4;
      Eigen::VectorXd p(m_nodes);
      for (int i = 0; i < m_nodes; ++i) p[i] = rng.uniform(0.4, 1.0);
      spec.p_hat = p;
    }

    auto [ga, gi] = loss_grad(spec, a, nu, data, m);
    Eigen::VectorXd fd;
    double fdi = 0.0;
    finite_diff_grad(
        [&](const Eigen::VectorXd& av, double iv) { return loss_value(spec, av, iv, data, m); },
        a, nu, 1e-6, fd, fdi);
    const double scale = std::max(1.0, ga.lpNorm<Eigen::Infinity>());
    CHECK((fd - ga).lpNorm<Eigen::Infinity>() / scale < 1e-5);
    CHECK(std::abs(fdi - gi) / std::max(1.0, std::abs(gi)) < 1e-5);
    ++done;
  }
}

TEST_CASE("gradient truncation error decays by pi^-2 per degree step") {
  Rng rng(29);
  EventMatrix x = random_events(8, 40, 0.5, rng);
  LossSpec complete;
  complete.family = LossFamily::Complete;
  complete.include_intercept = false;

  std::map<int, double> sup;
  for (int q : {2, 4, 6, 8}) {
    LossSpec trunc;
    trunc.family = LossFamily::Truncated;
    trunc.degree = q;
    double worst = 0.0;
    Rng points(31);  // same points for every q
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd a = random_ball_point(8, 1.0, points);
      const int m = rep % 8;
      auto [gc, gic] = loss_grad(complete, a, 0.0, x, m);
      auto [gt, git] = loss_grad(trunc, a, 0.0, x, m);
      worst = std::max(worst, (gc - gt).lpNorm<Eigen::Infinity>());
    }
    sup[q] = worst;
  }
  const double factor = 1.5 / (M_PI * M_PI);
  CHECK(sup[4] <= factor * sup[2]);
  CHECK(sup[6] <= factor * sup[4]);
  CHECK(sup[8] <= factor * sup[6]);
}

TEST_CASE("unbiasedness extends to gradients") {
  Rng rng(37);
  EventMatrix x = random_events(2, 3, 0.6, rng);
  Eigen::VectorXd a = random_ball_point(2, 1.0, rng);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 0.6);
  LossSpec trunc;
  trunc.family = LossFamily::Truncated;
  trunc.degree = 4;
  trunc.include_intercept = true;
  auto [gx, gxi] = loss_grad(trunc, a, 0.15, x, 0);

  for (int coord = 0; coord <= 2; ++coord) {
    const double averaged = expect_over_masks(x, p, [&](const EventMatrix& z) {
      LossSpec spec;
      spec.family = LossFamily::Unbiased;
      spec.degree = 4;
      spec.p_hat = p;
      spec.include_intercept = true;
      auto [gz, gzi] = loss_grad(spec, a, 0.15, z, 0);
      return coord < 2 ? gz[coord] : gzi;
    });
    const double expected = coord < 2 ? gx[coord] : gxi;
    CHECK(averaged == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("monotone truncation convergence of the corrected loss") {
  Rng rng(41);
  EventMatrix z = random_events(5, 25, 0.5, rng);
  for (double p_hat : {0.4, 0.6, 0.9}) {
    Eigen::VectorXd pv = Eigen::VectorXd::Constant(5, p_hat);
    for (int q : {2, 4, 6, 8}) {
      const double bound = 2.0 * std::pow(p_hat * M_PI, -q);
      for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd a = random_ball_point(5, 1.0, rng);
        const int m = rep % 5;
        const double lo = loss_unbiased(a, 0.0, z, m, pv, q);
        const double hi = loss_unbiased(a, 0.0, z, m, pv, q + 2);
        CHECK(std::abs(lo - hi) <= bound);
      }
    }
  }
}

TEST_CASE("full-data likelihood decomposes across rows") {
  // Joint per-bin Bernoulli log-likelihood computed directly equals the sum
  // of per-row losses (times -T_eff).
  Rng rng(43);
  const int m_nodes = 4, t = 15;
  EventMatrix x = random_events(m_nodes, t, 0.5, rng);
  Eigen::MatrixXd A(m_nodes, m_nodes);
  for (int i = 0; i < m_nodes; ++i) A.row(i) = random_ball_point(m_nodes, 0.9, rng).transpose();
  Eigen::VectorXd nu(m_nodes);
  for (int i = 0; i < m_nodes; ++i) nu[i] = rng.uniform(-0.3, 0.3);

  double joint = 0.0;
  for (int tt = 0; tt + 1 < t; ++tt) {
    for (int i = 0; i < m_nodes; ++i) {
      double y = nu[i];
      for (int j = 0; j < m_nodes; ++j) y += A(i, j) * x.data(j, tt);
      const double prob = sigmoid(y);
      joint += x.data(i, tt + 1) ? std::log(prob) : std::log(1 - prob);
    }
  }
  double row_sum = 0.0;
  for (int i = 0; i < m_nodes; ++i)
    row_sum += loss_complete(A.row(i).transpose(), nu[i], x, i);
  CHECK(-row_sum * (t - 1) == doctest::Approx(joint).epsilon(1e-12));
}

TEST_CASE("sufficient statistics invariants") {
  Rng rng(47);
  EventMatrix z = random_events(6, 25, 0.5, rng);
  SuffStats st = SuffStats::build(z);
  CHECK(st.t_eff == 24);
  CHECK((st.G - st.G.transpose()).norm() == 0.0);
  for (int i = 0; i < 6; ++i) CHECK(st.G(i, i) == st.s[i]);
}

TEST_CASE("spec validation") {
  EventMatrix z = EventMatrix::zeros(3, 4);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(loss_unbiased(a, 0.0, z, 0, scalar_p(0.0), 2), ConfigError);
  CHECK_THROWS_AS(loss_unbiased(a, 0.0, z, 0, scalar_p(1.5), 2), ConfigError);
  CHECK_THROWS_AS(loss_unbiased(a, 0.0, z, 0, scalar_p(0.5), 14), ConfigError);
  Eigen::VectorXd bad(2);
  bad << 0.5, 0.5;
  CHECK_THROWS_AS(loss_unbiased(a, 0.0, z, 0, bad, 2), ConfigError);
  // odd degree normalizes down
  Rng rng(53);
  EventMatrix z2 = random_events(3, 6, 0.5, rng);
  Eigen::VectorXd a2 = random_ball_point(3, 1.0, rng);
  CHECK(loss_unbiased(a2, 0.0, z2, 1, scalar_p(0.7), 3) ==
        loss_unbiased(a2, 0.0, z2, 1, scalar_p(0.7), 2));
  // too short in time
  EventMatrix one = EventMatrix::zeros(3, 1);
  CHECK_THROWS_AS(loss_complete(a, 0.0, one, 0), ConfigError);
}

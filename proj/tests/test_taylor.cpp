#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "barnet/errors.hpp"
#include "barnet/model.hpp"
#include "barnet/taylor.hpp"

using namespace barnet;

namespace {

// Independent oracle for the softplus derivatives at zero. With s = sigmoid,
// f' = s and s' = s(1-s), so f^(k) is a polynomial P_k(s) with
// P_1(s) = s and P_{k+1} = P_k'(s) * (s - s^2). Evaluating P_k at s = 1/2 in
// exact rationals gives f^(k)(0) without touching the Bernoulli-number route.
Rational derivative_at_zero(int k) {
  std::vector<Rational> poly = {Rational(0), Rational(1)};  // P_1
  for (int step = 1; step < k; ++step) {
    std::vector<Rational> deriv(poly.size() > 0 ? poly.size() - 1 : 0);
    for (std::size_t i = 1; i < poly.size(); ++i) deriv[i - 1] = Rational(i) * poly[i];
    // multiply by (s - s^2)
    std::vector<Rational> next(deriv.size() + 2, Rational(0));
    for (std::size_t i = 0; i < deriv.size(); ++i) {
      next[i + 1] += deriv[i];
      next[i + 2] -= deriv[i];
    }
    poly = std::move(next);
  }
  Rational s(1, 2), pw(1), acc(0);
  for (const auto& c : poly) {
    acc += c * pw;
    pw *= s;
  }
  return acc;
}

Rational factorial_rational(int n) {
  Rational r(1);
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

TEST_CASE("bernoulli numbers match the textbook values") {
  auto b = bernoulli_numbers(6);
  CHECK(b.values[0] == Rational(1));
  CHECK(b.values[1] == Rational(-1, 2));
  CHECK(b.values[2] == Rational(1, 6));
  CHECK(b.values[3] == Rational(0));
  CHECK(b.values[4] == Rational(-1, 30));
  CHECK(b.values[5] == Rational(0));
  CHECK(b.values[6] == Rational(1, 42));
}

TEST_CASE("odd bernoulli numbers vanish") {
  auto b = bernoulli_numbers(33);
  for (int q = 3; q <= 33; q += 2) CHECK(b.values[q] == Rational(0));
}

TEST_CASE("bernoulli q_max limit") {
  CHECK_THROWS_AS(bernoulli_numbers(65), ConfigError);
  CHECK_THROWS_AS(bernoulli_numbers(-1), ConfigError);
  CHECK_NOTHROW(bernoulli_numbers(64));
}

TEST_CASE("leading coefficients are exact") {
  auto table = partition_coeffs(4);
  CHECK(table[0] == std::log(2.0));
  CHECK(table[1] == 0.5);
  CHECK(table[2] == 0.125);
  CHECK(table[3] == 0.0);
  CHECK(table[4] == -1.0 / 192.0);

  CHECK(partition_coeff_exact(1) == Rational(1, 2));
  CHECK(partition_coeff_exact(2) == Rational(1, 8));
  CHECK(partition_coeff_exact(3) == Rational(0));
  CHECK(partition_coeff_exact(4) == Rational(-1, 192));
  CHECK(partition_coeff_exact(6) == Rational(1, 2880));
}

TEST_CASE("coefficients agree with the derivative-polynomial oracle exactly") {
  for (int k = 1; k <= 16; ++k) {
    Rational expected = derivative_at_zero(k) / factorial_rational(k);
    CHECK(partition_coeff_exact(k) == expected);
  }
}

TEST_CASE("low-order coefficients agree with central finite differences") {
  auto f = [](double x) { return softplus(x); };
  // second derivative, stencil [1,-2,1]
  {
    const double h = 0.004;
    const double d2 = (f(h) - 2 * f(0) + f(-h)) / (h * h);
    CHECK(std::abs(d2 / 2.0 - 0.125) < 1e-6);
  }
  // fourth derivative, stencil [1,-4,6,-4,1]
  {
    const double h = 0.02;
    const double d4 =
        (f(2 * h) - 4 * f(h) + 6 * f(0) - 4 * f(-h) + f(-2 * h)) / (h * h * h * h);
    CHECK(std::abs(d4 / 24.0 - (-1.0 / 192.0)) < 1e-5);
  }
}

TEST_CASE("magnitude bound |c_q| q pi^q <= 4 on even degrees") {
  auto table = partition_coeffs(32);
  for (int q = 2; q <= 32; q += 2) {
    const double product = std::abs(table[q]) * q * std::pow(M_PI, q);
    CHECK(product <= 4.0);
    // the product approaches 2 from above as q grows
    CHECK(product >= 1.9);
  }
}

TEST_CASE("odd coefficients beyond c_1 vanish") {
  auto table = partition_coeffs(31);
  for (int q = 3; q <= 31; q += 2) CHECK(table[q] == 0.0);
}

TEST_CASE("coefficient decay ratio") {
  auto table = partition_coeffs(32);
  const double bound = (1.0 + 0.1) / (M_PI * M_PI);
  for (int q = 4; q <= 30; q += 2) {
    CHECK(std::abs(table[q + 2]) / std::abs(table[q]) <= bound);
  }
}

TEST_CASE("pointwise truncation accuracy on [-1,1]") {
  for (int Q : {2, 4, 6, 8}) {
    const double bound = 2.0 * std::pow(M_PI, -Q);
    for (int i = 0; i < 1000; ++i) {
      const double x = -1.0 + 2.0 * i / 999.0;
      CHECK(std::abs(softplus(x) - softplus_truncated(x, Q)) <= bound);
    }
  }
}

TEST_CASE("truncation derivative matches finite differences of the truncation") {
  const double h = 1e-6;
  for (int q : {2, 4, 8}) {
    for (double x : {-0.9, -0.3, 0.0, 0.4, 1.0}) {
      const double fd = (softplus_truncated(x + h, q) - softplus_truncated(x - h, q)) / (2 * h);
      CHECK(std::abs(fd - softplus_truncated_deriv(x, q)) < 1e-6);
    }
  }
}

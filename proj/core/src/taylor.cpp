#include "barnet/taylor.hpp"

#include <cmath>
#include <mutex>

#include "barnet/errors.hpp"

namespace barnet {

namespace {

using boost::multiprecision::cpp_int;

cpp_int binomial(int n, int k) {
  cpp_int r = 1;
  for (int i = 0; i < k; ++i) {
    r *= (n - i);
    r /= (i + 1);
  }
  return r;
}

cpp_int factorial(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

BernoulliNumbers bernoulli_numbers(int q_max) {
  if (q_max < 0) throw ConfigError("bernoulli_numbers: q_max must be >= 0");
  if (q_max > 64)
    throw ConfigError("bernoulli_numbers: q_max > 64 exceeds the exact arithmetic budget");
  BernoulliNumbers out;
  out.values.resize(q_max + 1);
  out.values[0] = 1;
  // sum_{j=0}^{m} C(m+1, j) B_j = 0  =>  B_m = -(1/(m+1)) sum_{j<m} C(m+1,j) B_j
  for (int m = 1; m <= q_max; ++m) {
    Rational acc = 0;
    for (int j = 0; j < m; ++j) acc += Rational(binomial(m + 1, j)) * out.values[j];
    out.values[m] = -acc / (m + 1);
  }
  return out;
}

Rational partition_coeff_exact(int q) {
  if (q < 1) throw ConfigError("partition_coeff_exact: q must be >= 1 (c_0 is log 2)");
  if (q == 1) return Rational(1, 2);
  BernoulliNumbers b = bernoulli_numbers(q);
  cpp_int two_q = cpp_int(1) << q;
  return Rational(two_q - 1) * b.values[q] / (Rational(q) * Rational(factorial(q)));
}

CoeffTable partition_coeffs(int q_max) {
  if (q_max < 0) throw ConfigError("partition_coeffs: q_max must be >= 0");
  CoeffTable table;
  table.coeffs.resize(q_max + 1);
  table.coeffs[0] = std::log(2.0);
  if (q_max >= 1) table.coeffs[1] = 0.5;
  if (q_max >= 2) {
    BernoulliNumbers b = bernoulli_numbers(q_max);
    for (int q = 2; q <= q_max; ++q) {
      cpp_int two_q = cpp_int(1) << q;
      Rational c = Rational(two_q - 1) * b.values[q] / (Rational(q) * Rational(factorial(q)));
      table.coeffs[q] = static_cast<double>(c);
    }
  }
  return table;
}

const CoeffTable& CoeffTable::cached() {
  static const CoeffTable table = partition_coeffs(32);
  return table;
}

double softplus_truncated(double x, int q, const CoeffTable& table) {
  if (q > table.q_max()) throw ConfigError("softplus_truncated: q exceeds coefficient table");
  double acc = 0.0;
  for (int d = q; d >= 0; --d) acc = acc * x + table[d];  // Horner
  return acc;
}

double softplus_truncated_deriv(double x, int q, const CoeffTable& table) {
  if (q > table.q_max()) throw ConfigError("softplus_truncated_deriv: q exceeds coefficient table");
  double acc = 0.0;
  for (int d = q; d >= 1; --d) acc = acc * x + d * table[d];
  return acc;
}

}  // namespace barnet

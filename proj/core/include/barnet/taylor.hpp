#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

namespace barnet {

using Rational = boost::multiprecision::cpp_rational;

// B_0 .. B_qmax computed exactly; B_1 = -1/2 convention.
struct BernoulliNumbers {
  std::vector<Rational> values;
  int q_max() const { return static_cast<int>(values.size()) - 1; }
};

BernoulliNumbers bernoulli_numbers(int q_max);

// Maclaurin coefficients c_q of softplus, c_q = f^(q)(0)/q!.
// c_0 = log 2, c_1 = 1/2, c_q = (2^q - 1) B_q / (q * q!) for q >= 2;
// every odd coefficient beyond c_1 vanishes.
struct CoeffTable {
  std::vector<double> coeffs;
  int q_max() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator[](int q) const { return coeffs[q]; }

  // Shared table up to degree 32, built once.
  static const CoeffTable& cached();
};

CoeffTable partition_coeffs(int q_max);

// Exact rational value of c_q for q >= 1 (c_0 is irrational).
Rational partition_coeff_exact(int q);

// Evaluates the degree-q truncation  sum_{d<=q} c_d x^d.
double softplus_truncated(double x, int q, const CoeffTable& table = CoeffTable::cached());

// Derivative of the truncation: sum_{1<=d<=q} d c_d x^{d-1}.
double softplus_truncated_deriv(double x, int q, const CoeffTable& table = CoeffTable::cached());

}  // namespace barnet

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

// Test-side oracles. Nothing here calls into the library's arithmetic: exact
// rationals for scalar rounding, Eigen in long double for matrix norms, and
// std::mt19937_64 for test data.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

#include "sketchir/harness.hpp"

namespace sketchir::test
{

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;
using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline Rational exact(const Real &x) { return Rational(x.hi) + Rational(x.lo); }

inline Rational pow2(int e)
{
  Integer one = 1;
  return e >= 0 ? Rational(one << e) : Rational(Integer(1), one << -e);
}

struct Rounded
{
  Rational value;
  bool overflow = false;
};

// Nearest point of the format's grid, ties to even, by integer division on the
// grid spacing. Independent of the library's narrowing code.
inline Rounded oracle_round(const Rational &x, Format f)
{
  const PrecisionFormat &p = precision(f);
  if (x == 0)
  {
    return {Rational(0), false};
  }
  const Rational ax = abs(x);
  // Exponent e with 2^e <= |x| < 2^{e+1}.
  int e = static_cast<int>(std::floor(std::log2(static_cast<double>(ax))));
  while (pow2(e) > ax)
  {
    --e;
  }
  while (pow2(e + 1) <= ax)
  {
    ++e;
  }
  const int q = std::max(e, p.emin) - (p.mantissa_bits - 1);
  const Rational scaled = ax * pow2(-q);
  Integer k = numerator(scaled) / denominator(scaled);
  const Rational frac = scaled - Rational(k);
  if (frac > Rational(1, 2) || (frac == Rational(1, 2) && (k & 1) != 0))
  {
    ++k;
  }
  Rational r = Rational(k) * pow2(q);
  const bool over = r > Rational(p.max_finite);
  return {x < 0 ? Rational(-r) : r, over};
}

inline DenseMatrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed,
                                 Format fmt = Format::Double)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  std::vector<Real> d(m * n);
  for (auto &x : d)
  {
    x = Real(dist(gen));
  }
  return DenseMatrix(m, n, std::move(d), fmt);
}

inline Vector random_vector(std::size_t m, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Vector v(m);
  for (auto &x : v)
  {
    x = Real(dist(gen));
  }
  return v;
}

inline long double to_long(const Real &x)
{
  return static_cast<long double>(x.hi) + static_cast<long double>(x.lo);
}

inline LMatrix to_eigen(const DenseMatrix &M)
{
  LMatrix E(M.rows(), M.cols());
  for (std::size_t j = 0; j < M.cols(); ++j)
  {
    for (std::size_t i = 0; i < M.rows(); ++i)
    {
      E(i, j) = to_long(M(i, j));
    }
  }
  return E;
}

inline LVector to_eigen(std::span<const Real> v)
{
  LVector E(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    E(i) = to_long(v[i]);
  }
  return E;
}

inline LVector eigen_singular_values(const LMatrix &M)
{
  return Eigen::JacobiSVD<LMatrix>(M).singularValues();
}

inline long double eigen_norm2(const LMatrix &M) { return eigen_singular_values(M)(0); }

inline long double eigen_cond(const LMatrix &M)
{
  const LVector s = eigen_singular_values(M);
  return s(0) / s(s.size() - 1);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace sketchir::test

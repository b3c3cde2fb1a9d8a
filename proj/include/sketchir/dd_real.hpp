// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <compare>
#include <limits>

namespace sketchir
{

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2. Used as the "quad" format:
// about 106 significand bits with the exponent range of double.
//
// Every algorithm below relies on round-to-nearest binary64 arithmetic
// without contraction; the library is compiled with -ffp-contract=off.
struct dd_real
{
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd_real() = default;
  constexpr dd_real(double h) : hi(h) {}
  constexpr dd_real(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi; }
};

namespace dd
{

inline dd_real quick_two_sum(double a, double b)
{
  const double s = a + b;
  return {s, b - (s - a)};
}

inline dd_real two_sum(double a, double b)
{
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline dd_real two_prod(double a, double b)
{
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace dd

inline dd_real operator-(const dd_real &a) { return {-a.hi, -a.lo}; }

inline dd_real operator+(const dd_real &a, const dd_real &b)
{
  dd_real s = dd::two_sum(a.hi, b.hi);
  const dd_real t = dd::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = dd::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return dd::quick_two_sum(s.hi, s.lo);
}

inline dd_real operator+(const dd_real &a, double b)
{
  dd_real s = dd::two_sum(a.hi, b);
  s.lo += a.lo;
  return dd::quick_two_sum(s.hi, s.lo);
}

inline dd_real operator+(double a, const dd_real &b) { return b + a; }
inline dd_real operator-(const dd_real &a, const dd_real &b) { return a + (-b); }
inline dd_real operator-(const dd_real &a, double b) { return a + (-b); }
inline dd_real operator-(double a, const dd_real &b) { return (-b) + a; }

inline dd_real operator*(const dd_real &a, const dd_real &b)
{
  dd_real p = dd::two_prod(a.hi, b.hi);
  p.lo += (a.hi * b.lo + a.lo * b.hi) + a.lo * b.lo;
  return dd::quick_two_sum(p.hi, p.lo);
}

inline dd_real operator*(const dd_real &a, double b)
{
  dd_real p = dd::two_prod(a.hi, b);
  p.lo += a.lo * b;
  return dd::quick_two_sum(p.hi, p.lo);
}

inline dd_real operator*(double a, const dd_real &b) { return b * a; }

inline dd_real operator/(const dd_real &a, const dd_real &b)
{
  // Three-term long division.
  const double q1 = a.hi / b.hi;
  dd_real r = a - b * q1;
  const double q2 = r.hi / b.hi;
  r = r - b * q2;
  const double q3 = r.hi / b.hi;
  return dd::quick_two_sum(q1, q2) + q3;
}

inline dd_real operator/(const dd_real &a, double b) { return a / dd_real(b); }
inline dd_real operator/(double a, const dd_real &b) { return dd_real(a) / b; }

inline dd_real &operator+=(dd_real &a, const dd_real &b) { return a = a + b; }
inline dd_real &operator-=(dd_real &a, const dd_real &b) { return a = a - b; }
inline dd_real &operator*=(dd_real &a, const dd_real &b) { return a = a * b; }
inline dd_real &operator/=(dd_real &a, const dd_real &b) { return a = a / b; }

inline bool operator==(const dd_real &a, const dd_real &b)
{
  return a.hi == b.hi && a.lo == b.lo;
}

inline std::partial_ordering operator<=>(const dd_real &a, const dd_real &b)
{
  if (auto c = a.hi <=> b.hi; c != 0)
  {
    return c;
  }
  return a.lo <=> b.lo;
}

inline dd_real abs(const dd_real &a) { return a.hi < 0.0 ? -a : a; }

inline dd_real sqrt(const dd_real &a)
{
  if (a.hi <= 0.0)
  {
    return a.hi == 0.0 ? dd_real() : dd_real(std::numeric_limits<double>::quiet_NaN());
  }
  // One Newton step from the double approximation (Karp's trick).
  const double x = 1.0 / std::sqrt(a.hi);
  const double ax = a.hi * x;
  const dd_real ax2 = dd::two_prod(ax, ax);
  const double corr = (a - ax2).hi * (x * 0.5);
  return dd::two_sum(ax, corr);
}

inline bool isfinite(const dd_real &a) { return std::isfinite(a.hi) && std::isfinite(a.lo); }

// Exact scaling by a power of two.
inline dd_real ldexp(const dd_real &a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }

inline double to_double(const dd_real &a) { return a.hi + a.lo; }

}  // namespace sketchir

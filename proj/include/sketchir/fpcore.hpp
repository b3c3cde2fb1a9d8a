// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include "sketchir/dd_real.hpp"
#include "sketchir/error.hpp"
#include "sketchir/half.hpp"

namespace sketchir
{

// Storage scalar. Values in a lower format are kept with lo == 0.
using Real = dd_real;

enum class Format
{
  Half,
  Single,
  Double,
  Quad
};

struct PrecisionFormat
{
  Format name;
  int mantissa_bits;          // significand bits including the implicit bit
  int emin;                   // minimum normal exponent
  int emax;                   // maximum exponent
  double unit_roundoff;       // 2^-mantissa_bits; used in every bound
  double nominal_unit_roundoff;
  double max_finite;
  std::string_view label;
};

// Quad is realized as double-double: mantissa_bits = 106 drives the bounds,
// nominal_unit_roundoff keeps the binary128 value 2^-113 for reporting.
const PrecisionFormat &precision(Format f);

inline double unit_roundoff(Format f) { return precision(f).unit_roundoff; }

std::string_view to_string(Format f);

// Accepts "half" | "single" | "double" | "quad", case-insensitive.
Format parse_format(std::string_view name);

// True when a has a strictly smaller unit roundoff than b.
inline bool finer(Format a, Format b) { return static_cast<int>(a) > static_cast<int>(b); }
inline Format finest(Format a, Format b) { return finer(a, b) ? a : b; }

// The format whose unit roundoff is closest to u^2 from below (used for u_r).
Format squared(Format f);

// gamma_n = n u / (1 - n u); +inf once n u >= 1.
double gamma(double n, Format f);
// Same with the unspecified constant c (c = 1 by default).
double gamma_tilde(double n, Format f, double c = 1.0);

struct FpFlags
{
  bool overflow = false;
  bool underflow = false;
  bool div_by_zero = false;

  void merge(const FpFlags &o)
  {
    overflow |= o.overflow;
    underflow |= o.underflow;
    div_by_zero |= o.div_by_zero;
  }
};

Real round_scalar(const Real &x, Format f, FpFlags *flags = nullptr);

enum class Op
{
  Add,
  Sub,
  Mul,
  Div
};

// fl(a op b) in format f for operands representable in f.
Real fl_op(const Real &a, const Real &b, Op op, Format f, FpFlags *flags = nullptr);

// Compile-time view of the four formats. Kernels are templates over the
// arithmetic type and are entered through with_format().
template <class T>
struct format_traits;

template <>
struct format_traits<half>
{
  static constexpr Format format = Format::Half;
};
template <>
struct format_traits<float>
{
  static constexpr Format format = Format::Single;
};
template <>
struct format_traits<double>
{
  static constexpr Format format = Format::Double;
};
template <>
struct format_traits<dd_real>
{
  static constexpr Format format = Format::Quad;
};

template <class T>
concept Arithmetic = requires { format_traits<T>::format; };

namespace detail
{

// Round a double-double to a narrower type, honouring the low word when the
// high word sits exactly on a rounding midpoint.
template <class T>
T narrow(const Real &x)
{
  const T r = T(x.hi);
  if (x.lo == 0.0 || !std::isfinite(x.hi))
  {
    return r;
  }
  const double rd = static_cast<double>(r);
  if (rd == x.hi)
  {
    return r;
  }
  const double other = x.hi + (x.hi - rd);
  if (static_cast<double>(T(other)) == other && std::signbit(other - x.hi) == std::signbit(x.lo))
  {
    return T(other);
  }
  return r;
}

}  // namespace detail

// Load a stored value into arithmetic type T (rounds to T's format).
template <Arithmetic T>
inline T load(const Real &x)
{
  if constexpr (std::is_same_v<T, dd_real>)
  {
    return x;
  }
  else if constexpr (std::is_same_v<T, double>)
  {
    return x.hi;
  }
  else
  {
    return detail::narrow<T>(x);
  }
}

template <Arithmetic T>
inline Real store(const T &v)
{
  if constexpr (std::is_same_v<T, dd_real>)
  {
    return v;
  }
  else
  {
    return Real(static_cast<double>(v));
  }
}

// Constants entering a kernel are rounded to the kernel's format.
template <Arithmetic T>
inline T constant(double c)
{
  return T(c);
}

template <Arithmetic T>
inline double to_double(const T &v)
{
  if constexpr (std::is_same_v<T, dd_real>)
  {
    return v.hi + v.lo;
  }
  else
  {
    return static_cast<double>(v);
  }
}

template <Arithmetic T>
inline bool finite(const T &v)
{
  using std::isfinite;
  return isfinite(v);
}

// Invoke fn.template operator()<T>() with T the arithmetic type of f.
template <class Fn>
decltype(auto) with_format(Format f, Fn &&fn)
{
  switch (f)
  {
    case Format::Half:
      return fn.template operator()<half>();
    case Format::Single:
      return fn.template operator()<float>();
    case Format::Double:
      return fn.template operator()<double>();
    case Format::Quad:
      break;
  }
  return fn.template operator()<dd_real>();
}

}  // namespace sketchir

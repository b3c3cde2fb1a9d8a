// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>

namespace sketchir
{

// Round a binary64 value to a binary format with p significand bits (implicit
// bit included) and minimum normal exponent emin, ties to even. Gradual
// underflow below 2^emin; results larger than max_finite become +-inf.
inline double round_to_binary(double x, int p, int emin, double max_finite)
{
  if (!std::isfinite(x))
  {
    return x;
  }
  const double ax = std::abs(x);
  if (ax < std::ldexp(1.0, emin))
  {
    if (ax == 0.0)
    {
      return x;
    }
    // Subnormal range of the target: fixed quantum 2^(emin-p+1).
    const int qexp = emin - p + 1;
    return std::ldexp(std::nearbyint(std::ldexp(x, -qexp)), qexp);
  }
  auto bits = std::bit_cast<std::uint64_t>(x);
  const int drop = 52 - (p - 1);
  const std::uint64_t lsb = (bits >> drop) & 1u;
  bits += (std::uint64_t{1} << (drop - 1)) - 1 + lsb;
  bits &= ~((std::uint64_t{1} << drop) - 1);
  const double r = std::bit_cast<double>(bits);
  if (std::abs(r) > max_finite)
  {
    return std::copysign(HUGE_VAL, x);
  }
  return r;
}

// IEEE binary16 value set emulated on top of float. Arithmetic is carried out
// in binary32 and rounded to binary16; since 24 >= 2*11 + 2 the double
// rounding is innocuous for +, -, *, / and sqrt, so every operation is
// correctly rounded.
class half
{
public:
  static constexpr int digits = 11;
  static constexpr int min_exponent = -14;
  static constexpr double max_finite = 65504.0;

  constexpr half() = default;
  explicit half(double x) : v_(static_cast<float>(round(x))) {}

  explicit operator double() const { return v_; }
  explicit operator float() const { return v_; }
  float value() const { return v_; }

  static double round(double x) { return round_to_binary(x, digits, min_exponent, max_finite); }

  friend half operator+(half a, half b) { return half(double(a.v_ + b.v_)); }
  friend half operator-(half a, half b) { return half(double(a.v_ - b.v_)); }
  friend half operator*(half a, half b) { return half(double(a.v_ * b.v_)); }
  friend half operator/(half a, half b) { return half(double(a.v_ / b.v_)); }
  friend half operator-(half a) { return raw(-a.v_); }

  half &operator+=(half b) { return *this = *this + b; }
  half &operator-=(half b) { return *this = *this - b; }
  half &operator*=(half b) { return *this = *this * b; }
  half &operator/=(half b) { return *this = *this / b; }

  friend bool operator==(half a, half b) { return a.v_ == b.v_; }
  friend std::partial_ordering operator<=>(half a, half b) { return a.v_ <=> b.v_; }

  friend half sqrt(half a) { return half(double(std::sqrt(a.v_))); }
  friend half abs(half a) { return raw(std::abs(a.v_)); }
  friend bool isfinite(half a) { return std::isfinite(a.v_); }

private:
  static half raw(float v)
  {
    half h;
    h.v_ = v;
    return h;
  }

  float v_ = 0.0f;
};

}  // namespace sketchir

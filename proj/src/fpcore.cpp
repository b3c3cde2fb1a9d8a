// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/fpcore.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cfloat>
#include <limits>

namespace sketchir
{

std::string_view to_string(ErrorCode code)
{
  switch (code)
  {
    case ErrorCode::InvalidArgument:
      return "InvalidArgument";
    case ErrorCode::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::Overflow:
      return "Overflow";
    case ErrorCode::DivisionByZero:
      return "DivisionByZero";
    case ErrorCode::ZeroColumn:
      return "ZeroColumn";
    case ErrorCode::SingularR:
      return "SingularR";
    case ErrorCode::RankDeficient:
      return "RankDeficient";
    case ErrorCode::ZetaOutOfRange:
      return "ZetaOutOfRange";
    case ErrorCode::SketchOverflow:
      return "SketchOverflow";
    case ErrorCode::RankDeficientSketch:
      return "RankDeficientSketch";
    case ErrorCode::ProblemTooLargeForExactDiagnostics:
      return "ProblemTooLargeForExactDiagnostics";
    case ErrorCode::ParseError:
      return "ParseError";
    case ErrorCode::IoError:
      return "IoError";
  }
  return "Unknown";
}

namespace
{

const std::array<PrecisionFormat, 4> kFormats = {{
    {Format::Half, 11, -14, 15, 0x1p-11, 0x1p-11, 65504.0, "half"},
    {Format::Single, 24, -126, 127, 0x1p-24, 0x1p-24, static_cast<double>(FLT_MAX), "single"},
    {Format::Double, 53, -1022, 1023, 0x1p-53, 0x1p-53, DBL_MAX, "double"},
    {Format::Quad, 106, -1022, 1023, 0x1p-106, 0x1p-113, DBL_MAX, "quad"},
}};

}  // namespace

const PrecisionFormat &precision(Format f) { return kFormats[static_cast<std::size_t>(f)]; }

std::string_view to_string(Format f) { return precision(f).label; }

Format parse_format(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto &p : kFormats)
  {
    if (lower == p.label)
    {
      return p.name;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown precision format '" + std::string(name) + "'");
}

Format squared(Format f)
{
  switch (f)
  {
    case Format::Half:
      return Format::Single;
    case Format::Single:
      return Format::Double;
    case Format::Double:
    case Format::Quad:
      return Format::Quad;
  }
  return Format::Quad;
}

double gamma(double n, Format f)
{
  const double nu = n * unit_roundoff(f);
  return nu >= 1.0 ? std::numeric_limits<double>::infinity() : nu / (1.0 - nu);
}

double gamma_tilde(double n, Format f, double c) { return gamma(c * n, f); }

Real round_scalar(const Real &x, Format f, FpFlags *flags)
{
  const Real r = with_format(f, [&]<class T>() { return store(load<T>(x)); });
  if (flags != nullptr)
  {
    if (isfinite(x) && !isfinite(r))
    {
      flags->overflow = true;
    }
    if (r.hi == 0.0 && x.hi != 0.0)
    {
      flags->underflow = true;
    }
  }
  return r;
}

namespace
{

// Wide enough that every sum, difference or product of two double-double
// operands is held exactly.
constexpr mpfr_prec_t kExactBits = 4400;

class MpfrValue
{
public:
  MpfrValue() { mpfr_init2(v_, kExactBits); }
  ~MpfrValue() { mpfr_clear(v_); }
  MpfrValue(const MpfrValue &) = delete;
  MpfrValue &operator=(const MpfrValue &) = delete;

  mpfr_ptr get() { return v_; }

private:
  mpfr_t v_;
};

void load_exact(mpfr_ptr dst, const Real &x)
{
  mpfr_set_d(dst, x.hi, MPFR_RNDN);
  mpfr_add_d(dst, dst, x.lo, MPFR_RNDN);
}

// hi = RN(x), lo = RN(x - hi): the error is at most 2^-106 |hi|.
Real round_to_pair(mpfr_ptr x)
{
  const double hi = mpfr_get_d(x, MPFR_RNDN);
  if (!std::isfinite(hi) || hi == 0.0)
  {
    return Real(hi);
  }
  mpfr_sub_d(x, x, hi, MPFR_RNDN);
  return Real(hi, mpfr_get_d(x, MPFR_RNDN));
}

// Quad-format scalar operation rounded from the exact result. The kernels use
// the faster compensated operators in dd_real.hpp instead.
Real quad_op(const Real &a, const Real &b, Op op)
{
  MpfrValue x;
  MpfrValue y;
  load_exact(x.get(), a);
  load_exact(y.get(), b);
  switch (op)
  {
    case Op::Add:
      mpfr_add(x.get(), x.get(), y.get(), MPFR_RNDN);
      break;
    case Op::Sub:
      mpfr_sub(x.get(), x.get(), y.get(), MPFR_RNDN);
      break;
    case Op::Mul:
      mpfr_mul(x.get(), x.get(), y.get(), MPFR_RNDN);
      break;
    case Op::Div:
      mpfr_div(x.get(), x.get(), y.get(), MPFR_RNDN);
      break;
  }
  return round_to_pair(x.get());
}

}  // namespace

Real fl_op(const Real &a, const Real &b, Op op, Format f, FpFlags *flags)
{
  const Real r = f == Format::Quad ? quad_op(a, b, op) : with_format(f, [&]<class T>() {
    const T x = load<T>(a);
    const T y = load<T>(b);
    switch (op)
    {
      case Op::Add:
        return store(T(x + y));
      case Op::Sub:
        return store(T(x - y));
      case Op::Mul:
        return store(T(x * y));
      case Op::Div:
        break;
    }
    return store(T(x / y));
  });
  if (flags != nullptr)
  {
    if (op == Op::Div && b.hi == 0.0)
    {
      flags->div_by_zero = true;
    }
    else if (isfinite(a) && isfinite(b) && !isfinite(r))
    {
      flags->overflow = true;
    }
  }
  return r;
}

}  // namespace sketchir

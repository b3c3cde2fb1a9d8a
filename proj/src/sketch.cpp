// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/sketch.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "sketchir/linalg.hpp"
#include "sketchir/random.hpp"

namespace sketchir
{

namespace
{

std::string lowercase(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <class T>
std::vector<T> sketch_columns(const SketchOperator &omega, const DenseMatrix &A)
{
  const std::size_t s = omega.s;
  const std::size_t m = omega.m;
  const std::size_t n = A.cols();
  std::vector<T> Y(s * n, T(0.0));
  if (omega.kind == SketchKind::Gaussian)
  {
    std::vector<T> om(omega.dense.size());
    for (std::size_t i = 0; i < om.size(); ++i)
    {
      om[i] = T(omega.dense[i]);
    }
    for (std::size_t j = 0; j < n; ++j)
    {
      const auto a = A.col(j);
      T *y = Y.data() + j * s;
      for (std::size_t k = 0; k < m; ++k)
      {
        const T akj = load<T>(a[k]);
        const T *ok = om.data() + k * s;
        for (std::size_t i = 0; i < s; ++i)
        {
          y[i] += ok[i] * akj;
        }
      }
    }
  }
  else
  {
    const std::size_t z = static_cast<std::size_t>(omega.zeta);
    std::vector<T> vals(omega.values.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
    {
      vals[i] = T(omega.values[i]);
    }
    for (std::size_t j = 0; j < n; ++j)
    {
      const auto a = A.col(j);
      T *y = Y.data() + j * s;
      for (std::size_t k = 0; k < m; ++k)
      {
        const T akj = load<T>(a[k]);
        for (std::size_t p = k * z; p < (k + 1) * z; ++p)
        {
          y[omega.row_index[p]] += vals[p] * akj;
        }
      }
    }
  }
  return Y;
}

void check_shape(const SketchOperator &omega, std::size_t rows)
{
  if (omega.m != rows)
  {
    throw Error(ErrorCode::DimensionMismatch, "sketch has " + std::to_string(omega.m) +
                                                  " columns, operand has " + std::to_string(rows) +
                                                  " rows");
  }
}

}  // namespace

std::string_view to_string(SketchKind k)
{
  switch (k)
  {
    case SketchKind::Gaussian:
      return "gaussian";
    case SketchKind::SparseSign:
      return "sparse";
    case SketchKind::Identity:
      break;
  }
  return "identity";
}

SketchKind parse_sketch_kind(std::string_view name)
{
  const std::string s = lowercase(name);
  if (s == "gaussian")
  {
    return SketchKind::Gaussian;
  }
  if (s == "sparse" || s == "sparse_sign" || s == "sparsesign")
  {
    return SketchKind::SparseSign;
  }
  if (s == "identity" || s == "none")
  {
    return SketchKind::Identity;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown sketch kind '" + std::string(name) + "'");
}

std::string_view to_string(GaussianConvention c)
{
  return c == GaussianConvention::Theory ? "theory" : "paper";
}

GaussianConvention parse_convention(std::string_view name)
{
  const std::string s = lowercase(name);
  if (s == "theory")
  {
    return GaussianConvention::Theory;
  }
  if (s == "paper")
  {
    return GaussianConvention::Paper;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown Gaussian convention '" + std::string(name) + "'");
}

std::string_view SketchOperator::rng() const { return kRngName; }

double SketchOperator::entry(std::size_t i, std::size_t j) const
{
  switch (kind)
  {
    case SketchKind::Gaussian:
      return dense[i + j * s];
    case SketchKind::SparseSign:
    {
      const std::size_t z = static_cast<std::size_t>(zeta);
      for (std::size_t p = j * z; p < (j + 1) * z; ++p)
      {
        if (row_index[p] == i)
        {
          return values[p];
        }
      }
      return 0.0;
    }
    case SketchKind::Identity:
      break;
  }
  return i == j ? 1.0 : 0.0;
}

DenseMatrix SketchOperator::to_dense() const
{
  std::vector<Real> d(s * m);
  if (kind == SketchKind::Gaussian)
  {
    for (std::size_t i = 0; i < d.size(); ++i)
    {
      d[i] = Real(dense[i]);
    }
  }
  else if (kind == SketchKind::SparseSign)
  {
    const std::size_t z = static_cast<std::size_t>(zeta);
    for (std::size_t j = 0; j < m; ++j)
    {
      for (std::size_t p = j * z; p < (j + 1) * z; ++p)
      {
        d[row_index[p] + j * s] = Real(values[p]);
      }
    }
  }
  else
  {
    for (std::size_t i = 0; i < m; ++i)
    {
      d[i + i * s] = Real(1.0);
    }
  }
  return DenseMatrix::adopt(s, m, std::move(d), Format::Double);
}

double SketchOperator::isometry_factor() const
{
  switch (kind)
  {
    case SketchKind::Gaussian:
      return 1.0 / (scale * std::sqrt(static_cast<double>(s)));
    case SketchKind::SparseSign:
      return 1.0 / std::sqrt(static_cast<double>(m));
    case SketchKind::Identity:
      break;
  }
  return 1.0;
}

SketchOperator make_gaussian(std::size_t s, std::size_t m, std::uint64_t seed,
                             GaussianConvention convention, std::size_t n)
{
  if (s == 0 || m == 0)
  {
    throw Error(ErrorCode::InvalidArgument, "sketch dimensions must be positive");
  }
  SketchOperator op;
  op.kind = SketchKind::Gaussian;
  op.s = s;
  op.m = m;
  op.seed = seed;
  op.convention = convention;
  if (convention == GaussianConvention::Theory)
  {
    op.scale = 1.0 / std::sqrt(static_cast<double>(s));
  }
  else
  {
    const std::size_t nn = n == 0 ? std::max<std::size_t>(1, s / 4) : n;
    op.scale = 1.0 / std::sqrt(4.0 * static_cast<double>(nn));
  }
  op.dense.resize(s * m);
  for (std::size_t j = 0; j < m; ++j)
  {
    RandomStream rng(seed, StreamKind::GaussianSketch, j);
    for (std::size_t i = 0; i < s; ++i)
    {
      op.dense[i + j * s] = op.scale * rng.normal();
    }
  }
  return op;
}

SketchOperator make_sparse_sign(std::size_t s, std::size_t m, int zeta, std::uint64_t seed)
{
  if (zeta < 2 || static_cast<std::size_t>(zeta) > s)
  {
    throw Error(ErrorCode::ZetaOutOfRange,
                "zeta = " + std::to_string(zeta) + " must lie in [2, " + std::to_string(s) + "]");
  }
  SketchOperator op;
  op.kind = SketchKind::SparseSign;
  op.s = s;
  op.m = m;
  op.zeta = zeta;
  op.seed = seed;
  op.scale = std::sqrt(static_cast<double>(m) / zeta);
  const std::size_t z = static_cast<std::size_t>(zeta);
  op.row_index.resize(m * z);
  op.values.resize(m * z);
  std::vector<std::uint32_t> rows;
  for (std::size_t j = 0; j < m; ++j)
  {
    RandomStream rng(seed, StreamKind::SparseSketch, j);
    // Floyd's sampling of zeta distinct rows.
    rows.clear();
    for (std::size_t t = s - z; t < s; ++t)
    {
      const auto r = static_cast<std::uint32_t>(rng.below(t + 1));
      if (std::find(rows.begin(), rows.end(), r) == rows.end())
      {
        rows.push_back(r);
      }
      else
      {
        rows.push_back(static_cast<std::uint32_t>(t));
      }
    }
    std::sort(rows.begin(), rows.end());
    for (std::size_t p = 0; p < z; ++p)
    {
      op.row_index[j * z + p] = rows[p];
      op.values[j * z + p] = (rng.next_u64() >> 63) != 0 ? -op.scale : op.scale;
    }
  }
  return op;
}

SketchOperator make_identity(std::size_t m)
{
  SketchOperator op;
  op.kind = SketchKind::Identity;
  op.s = m;
  op.m = m;
  return op;
}

DenseMatrix apply_sketch(const SketchOperator &omega, const DenseMatrix &A, Format fmt)
{
  check_shape(omega, A.rows());
  if (omega.kind == SketchKind::Identity)
  {
    FpFlags flags;
    DenseMatrix Y = round_matrix(A, fmt, &flags);
    if (flags.overflow)
    {
      throw Error(ErrorCode::SketchOverflow,
                  "casting A to " + std::string(to_string(fmt)) + " overflows; enable scaling");
    }
    return Y;
  }
  std::vector<Real> out = with_format(fmt, [&]<class T>() {
    const std::vector<T> Y = sketch_columns<T>(omega, A);
    std::vector<Real> d(Y.size());
    for (std::size_t i = 0; i < Y.size(); ++i)
    {
      if (!finite(Y[i]))
      {
        throw Error(ErrorCode::SketchOverflow, "sketch entry (" + std::to_string(i % omega.s) +
                                                   ", " + std::to_string(i / omega.s) +
                                                   ") overflows in " +
                                                   std::string(to_string(fmt)) +
                                                   "; enable scaling");
      }
      d[i] = store(Y[i]);
    }
    return d;
  });
  return DenseMatrix::adopt(omega.s, A.cols(), std::move(out), fmt);
}

Vector apply_sketch(const SketchOperator &omega, std::span<const Real> b, Format fmt)
{
  const DenseMatrix B = DenseMatrix::adopt(b.size(), 1, Vector(b.begin(), b.end()), Format::Quad);
  const DenseMatrix Y = apply_sketch(omega, B, fmt);
  return Vector(Y.data().begin(), Y.data().end());
}

DenseMatrix exact_sketch(const SketchOperator &omega, const DenseMatrix &A)
{
  check_shape(omega, A.rows());
  if (omega.kind == SketchKind::Identity)
  {
    return DenseMatrix::adopt(A.rows(), A.cols(), Vector(A.data().begin(), A.data().end()),
                              Format::Quad);
  }
  const std::vector<dd_real> Y = sketch_columns<dd_real>(omega, A);
  return DenseMatrix::adopt(omega.s, A.cols(), Y, Format::Quad);
}

double default_theta(Format fmt, std::size_t m)
{
  if (fmt != Format::Half)
  {
    return 1.0;
  }
  return 0.1 * precision(fmt).max_finite / std::sqrt(static_cast<double>(m));
}

std::pair<ColumnScaling, DenseMatrix> column_scaling(const DenseMatrix &A, double theta,
                                                     Format fmt)
{
  if (!(theta > 0.0))
  {
    throw Error(ErrorCode::InvalidArgument, "scaling multiplier must be positive");
  }
  ColumnScaling sc;
  sc.theta = theta;
  sc.S.resize(A.cols());
  sc.column_max.resize(A.cols());
  std::vector<Real> scaled(A.data().size());
  for (std::size_t j = 0; j < A.cols(); ++j)
  {
    Real mx(0.0);
    for (const auto &x : A.col(j))
    {
      mx = std::max(mx, abs(x));
    }
    if (mx.hi == 0.0)
    {
      throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " is zero");
    }
    sc.column_max[j] = mx;
    sc.S[j] = Real(1.0) / mx;
    for (std::size_t i = 0; i < A.rows(); ++i)
    {
      scaled[i + j * A.rows()] = (A(i, j) / mx) * Real(theta);
    }
  }
  DenseMatrix raw = DenseMatrix::adopt(A.rows(), A.cols(), std::move(scaled), Format::Quad);
  return {sc, round_matrix(raw, fmt, nullptr, true)};
}

double distortion(const SketchOperator &omega, const DenseMatrix &A)
{
  const QRFactors qr = householder_qr(A, Format::Quad);
  const DenseMatrix Q = explicit_q(qr, Format::Quad);
  const SingularValues sv = svd_values(exact_sketch(omega, Q));
  const double c = omega.isometry_factor();
  const double hi = c * c * sv.max() * sv.max() - 1.0;
  const double lo = 1.0 - c * c * sv.min() * sv.min();
  return std::max(hi, lo);
}

double sampled_distortion(const SketchOperator &omega, const DenseMatrix &A, int trials,
                          std::uint64_t seed)
{
  const DenseMatrix OA = exact_sketch(omega, A);
  double eps = 0.0;
  for (int t = 0; t < trials; ++t)
  {
    RandomStream rng(seed, StreamKind::Directions, static_cast<std::uint64_t>(t));
    Vector y(A.cols());
    for (auto &yi : y)
    {
      yi = Real(rng.normal());
    }
    const Real ay = nrm2(matvec(A, y, Format::Quad), Format::Quad);
    const Real oy = nrm2(matvec(OA, y, Format::Quad), Format::Quad);
    const Real ratio = Real(omega.isometry_factor()) * oy / ay;
    eps = std::max(eps, std::abs(to_double(ratio * ratio) - 1.0));
  }
  return eps;
}

}  // namespace sketchir

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/oracle.hpp"

#include <string>

namespace sketchir
{

double ReferenceSolution::kappa() const
{
  if (sigma.empty())
  {
    throw Error(ErrorCode::InvalidArgument, "reference computed without singular values");
  }
  return to_double(sigma.front() / sigma.back());
}

ReferenceSolution reference_solution(const DenseMatrix &A, std::span<const Real> b,
                                     bool with_sigma)
{
  if (b.size() != A.rows())
  {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length differs from rows of A");
  }
  QRFactors qr;
  try
  {
    qr = householder_qr(A, Format::Quad);
  }
  catch (const Error &e)
  {
    throw Error(ErrorCode::RankDeficient, e.what());
  }
  const std::size_t n = A.cols();
  Real rmax(0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    rmax = std::max(rmax, qr.R(i, i));
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    if (qr.R(i, i) <= rmax * Real(static_cast<double>(A.rows()) * 0x1p-106))
    {
      throw Error(ErrorCode::RankDeficient,
                  "A is numerically rank deficient at column " + std::to_string(i));
    }
  }
  ReferenceSolution ref;
  ref.x_star = tri_solve(qr.R, apply_qt(qr, b, Format::Quad), false, Format::Quad);
  // b - A x* would carry the rounding of x* (size u |A| |x*|, growing with
  // kappa); projecting b onto range(A)-perp keeps A^T r* at O(u |A| |b|).
  ref.r_star = project_out(qr, b, Format::Quad);
  if (with_sigma)
  {
    ref.sigma = svd_values(A).values;
  }
  return ref;
}

std::pair<DenseMatrix, DenseMatrix> brute_force_smallcase(const DenseMatrix &A)
{
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  if (m > 8 || n > 4 || m < n)
  {
    throw Error(ErrorCode::InvalidArgument, "brute force oracle needs n <= m <= 8 and n <= 4");
  }
  std::vector<Vector> q;
  std::vector<Real> r(n * n);
  for (std::size_t j = 0; j < n; ++j)
  {
    Vector v(A.col(j).begin(), A.col(j).end());
    const Real column_norm = nrm2(v, Format::Quad);
    for (int pass = 0; pass < 2; ++pass)
    {
      for (std::size_t i = 0; i < j; ++i)
      {
        const Real c = dot(q[i], v, Format::Quad);
        r[i + j * n] += c;
        axpy(-c, q[i], v, Format::Quad);
      }
    }
    const Real nv = nrm2(v, Format::Quad);
    if (nv <= column_norm * Real(static_cast<double>(m) * 0x1p-100))
    {
      throw Error(ErrorCode::RankDeficient, "column " + std::to_string(j) + " is dependent");
    }
    r[j + j * n] = nv;
    for (auto &x : v)
    {
      x = x / nv;
    }
    q.push_back(std::move(v));
  }
  std::vector<Real> qd(m * n);
  for (std::size_t j = 0; j < n; ++j)
  {
    std::copy(q[j].begin(), q[j].end(), qd.begin() + static_cast<std::ptrdiff_t>(j * m));
  }
  return {DenseMatrix::adopt(m, n, std::move(qd), Format::Quad),
          DenseMatrix::adopt(n, n, std::move(r), Format::Quad)};
}

double relative_error(std::span<const Real> approx, std::span<const Real> exact)
{
  const Vector d = sub(approx, exact, Format::Quad);
  return to_double(nrm2(d, Format::Quad) / nrm2(exact, Format::Quad));
}

}  // namespace sketchir

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "sketchir/matrix.hpp"

namespace sketchir
{

// Reference (unblocked) kernels. Every kernel rounds its inputs to fmt on
// entry and performs each scalar operation in fmt, so the standard rounding
// model applies with u = unit_roundoff(fmt).

Real dot(std::span<const Real> x, std::span<const Real> y, Format fmt);
Real nrm2(std::span<const Real> x, Format fmt);
// y <- y + alpha * x
void axpy(const Real &alpha, std::span<const Real> x, std::span<Real> y, Format fmt);
// x <- alpha * x
void scal(const Real &alpha, std::span<Real> x, Format fmt);
// x + y and x - y
Vector add(std::span<const Real> x, std::span<const Real> y, Format fmt);
Vector sub(std::span<const Real> x, std::span<const Real> y, Format fmt);

// A x (or A^T x) by inner products accumulated in order.
Vector matvec(const DenseMatrix &A, std::span<const Real> x, Format fmt, bool transpose = false);

// Classical inner-product matrix product.
DenseMatrix matmul(const DenseMatrix &A, const DenseMatrix &B, Format fmt);

// Economic Householder QR, R with nonnegative diagonal.
//
// Q = H_1 ... H_n [I; 0] diag(signs); each H_k = I - tau_k v_k v_k^T with
// v_k(k) = 1 and the rest of v_k stored below the diagonal of `reflectors`.
struct QRFactors
{
  DenseMatrix reflectors;
  Vector tau;
  std::vector<int> signs;
  DenseMatrix R;
  Format fmt = Format::Double;
};

QRFactors householder_qr(const DenseMatrix &Y, Format fmt);

// First n entries of Q^T v, applied reflector by reflector.
Vector apply_qt(const QRFactors &qr, std::span<const Real> v, Format fmt);

// (I - Q Q^T) v through the full reflector sequence. Its product with Y^T is
// O(u |Y| |v|) whatever the conditioning of Y.
Vector project_out(const QRFactors &qr, std::span<const Real> v, Format fmt);

// Explicit s x n Q factor; for diagnostics and tests only.
DenseMatrix explicit_q(const QRFactors &qr, Format fmt);

// Solves R x = v (or R^T x = v) for upper-triangular R by substitution.
Vector tri_solve(const DenseMatrix &R, std::span<const Real> v, bool transpose, Format fmt);

// A R^{-1} for upper-triangular R, column by column.
DenseMatrix right_tri_solve(const DenseMatrix &A, const DenseMatrix &R, Format fmt);

struct SingularValues
{
  std::vector<Real> values;  // descending

  double max() const { return values.empty() ? 0.0 : to_double(values.front()); }
  double min() const { return values.empty() ? 0.0 : to_double(values.back()); }
  double cond() const { return max() / min(); }
  double pinv_norm() const { return 1.0 / min(); }
};

// Singular values at Quad: Householder QR followed by one-sided Jacobi on R.
SingularValues svd_values(const DenseMatrix &M);

// Singular values of a symmetric matrix as |eigenvalues|, computed at Quad by
// Householder tridiagonalization and implicit QL. Much cheaper than
// svd_values for large square matrices.
SingularValues symmetric_singular_values(const DenseMatrix &M);

inline double norm2(const DenseMatrix &M) { return svd_values(M).max(); }

// Frobenius norm at Quad.
double frobenius(const DenseMatrix &M);

// A - B at Quad.
DenseMatrix difference(const DenseMatrix &A, const DenseMatrix &B);

}  // namespace sketchir

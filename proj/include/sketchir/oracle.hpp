// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "sketchir/linalg.hpp"

namespace sketchir
{

// Least-squares solution and residual at Quad, used as ground truth.
struct ReferenceSolution
{
  Vector x_star;
  Vector r_star;
  std::vector<Real> sigma;  // singular values of A, descending

  double kappa() const;
};

// Householder QR of A at Quad, back substitution, r = b - A x at Quad.
// With with_sigma = false the singular values are left empty.
ReferenceSolution reference_solution(const DenseMatrix &A, std::span<const Real> b,
                                     bool with_sigma = true);

// Classical Gram-Schmidt with full reorthogonalization at Quad for tiny
// matrices (m <= 8, n <= 4). R has a positive diagonal.
std::pair<DenseMatrix, DenseMatrix> brute_force_smallcase(const DenseMatrix &A);

// |a - b| / |b| with norms at Quad.
double relative_error(std::span<const Real> approx, std::span<const Real> exact);

}  // namespace sketchir

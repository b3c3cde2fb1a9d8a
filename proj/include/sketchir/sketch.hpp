// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "sketchir/matrix.hpp"

namespace sketchir
{

enum class SketchKind
{
  Gaussian,
  SparseSign,
  Identity
};

// Theory: entries N(0, 1/s). Paper: (4n)^{-1/2} G with G standard normal;
// both agree when s = 4n.
enum class GaussianConvention
{
  Theory,
  Paper
};

std::string_view to_string(SketchKind k);
SketchKind parse_sketch_kind(std::string_view name);
std::string_view to_string(GaussianConvention c);
GaussianConvention parse_convention(std::string_view name);

// Immutable s x m embedding. Entries are binary64 values.
struct SketchOperator
{
  SketchKind kind = SketchKind::Identity;
  std::size_t s = 0;
  std::size_t m = 0;
  double scale = 1.0;
  int zeta = 0;
  std::uint64_t seed = 0;
  GaussianConvention convention = GaussianConvention::Theory;

  // Gaussian: column-major s x m, already multiplied by scale.
  std::vector<double> dense;
  // SparseSign: zeta (row, value) pairs per column, rows ascending.
  std::vector<std::uint32_t> row_index;
  std::vector<double> values;

  std::string_view rng() const;
  // Entry (i, j); O(zeta) for sparse operators.
  double entry(std::size_t i, std::size_t j) const;
  // Dense copy at Double, for diagnostics.
  DenseMatrix to_dense() const;
  // c with E|c Omega x|^2 = |x|^2. Preconditioning is invariant to c; the
  // distortion measures below apply it so that sparse sign operators (column
  // norm sqrt(m)) and off-convention Gaussians are judged as embeddings.
  double isometry_factor() const;
};

// Paper convention uses scale (4n)^{-1/2}; n defaults to s / 4.
SketchOperator make_gaussian(std::size_t s, std::size_t m, std::uint64_t seed,
                             GaussianConvention convention = GaussianConvention::Paper,
                             std::size_t n = 0);

SketchOperator make_sparse_sign(std::size_t s, std::size_t m, int zeta, std::uint64_t seed);

SketchOperator make_identity(std::size_t m);

// Omega * A with A and the entries of Omega rounded to fmt and every scalar
// operation performed in fmt. Throws SketchOverflow if a result is not finite.
DenseMatrix apply_sketch(const SketchOperator &omega, const DenseMatrix &A, Format fmt);
Vector apply_sketch(const SketchOperator &omega, std::span<const Real> b, Format fmt);

// Exact (Quad) product of the binary64 operator with A, no rounding of A.
DenseMatrix exact_sketch(const SketchOperator &omega, const DenseMatrix &A);

struct ColumnScaling
{
  Vector S;           // 1 / max_i |A_ij|
  Vector column_max;  // S^{-1}, exact
  double theta = 1.0;
};

// Returns S and round(A S theta, fmt); A S theta is formed at Quad.
std::pair<ColumnScaling, DenseMatrix> column_scaling(const DenseMatrix &A, double theta,
                                                     Format fmt);

// 0.1 * max_finite(Half) / sqrt(m) for Half, which keeps Gaussian sketch sums
// of unit-scaled columns in range; 1 for wider formats, whose range is never
// the constraint and whose squared norms must stay finite in the QR.
double default_theta(Format fmt, std::size_t m);

// Distortion of range(A) under c Omega (c = isometry_factor): the smallest eps
// with (1 - eps)|Ay|^2 <= |c Omega A y|^2 <= (1 + eps)|Ay|^2 for every y, from
// the singular values of c Omega Q_A at Quad. May exceed 1.
double distortion(const SketchOperator &omega, const DenseMatrix &A);

// Same quantity estimated as the largest deviation over random directions.
double sampled_distortion(const SketchOperator &omega, const DenseMatrix &A, int trials,
                          std::uint64_t seed);

}  // namespace sketchir

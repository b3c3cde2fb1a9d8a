// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

#include "sketchir/precond.hpp"

namespace sketchir
{

struct KrylovConfig
{
  int max_iters = 50;
  double tol = 1e-12;
  Format u = Format::Double;    // working precision
  Format u_a = Format::Double;  // products with the augmented matrix
  Format u_l = Format::Double;  // left preconditioner
  Format u_r = Format::Double;  // right preconditioner
  bool reorthogonalize = false;
  double alpha = 1.0;  // scaling of the identity block

  void validate() const;
};

enum class Termination
{
  Tolerance,
  MaxIters,
  Breakdown
};

std::string_view to_string(Termination t);

struct SolveTrace
{
  int iterations = 0;
  std::vector<double> residual_history;  // relative to the initial residual
  Termination termination = Termination::MaxIters;
  int overflow_events = 0;
  double orthogonality_loss = 0.0;  // |V^T V - I|_F of the Arnoldi basis
};

struct LsqrResult
{
  Vector x;
  SolveTrace trace;
};

// LSQR on min |b - A x| right-preconditioned by the bundle, started from x0.
// The stopping rule is the standard one: |r| <= tol |b| or
// |B^T r| <= tol |B|_F |r| with B = A P^{-1} and norms from the recurrences.
LsqrResult lsqr_right_precond(const DenseMatrix &A, std::span<const Real> b,
                              const PreconditionerBundle &bundle, std::span<const Real> x0,
                              const KrylovConfig &cfg);

// (alpha v_r + A v_x, A^T v_r) at fmt.
Vector apply_augmented(const DenseMatrix &A, std::span<const Real> v, Format fmt,
                       double alpha = 1.0);

enum class Side
{
  Left,
  Right
};

// Left: (v_r, P^{-T} v_x). Right: (v_r, P^{-1} v_x). v_r is copied bit for bit.
Vector apply_split_precond(const PreconditionerBundle &bundle, Side side,
                           std::span<const Real> v, Format fmt);

struct FgmresResult
{
  Vector delta_r;
  Vector delta_x;
  SolveTrace trace;
};

// Flexible GMRES on M_L^{-1} A_aug M_R^{-1} y = rhs with x0 = 0. The returned
// correction is assembled from the stored preconditioned vectors, so it is
// already in the original variables: (delta_r, delta_x) with
// delta_x = P^{-1} delta_z.
FgmresResult fgmres_augmented(const DenseMatrix &A, const PreconditionerBundle &bundle,
                              std::span<const Real> rhs, const KrylovConfig &cfg);

}  // namespace sketchir

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sketchir/linalg.hpp"
#include "sketchir/sketch.hpp"

namespace sketchir
{

// R-factor of a sketch computed in two precisions: the sketch at u_s and its
// Householder QR at u_qr. With column scaling the effective preconditioner is
// Rhat * (theta S)^{-1}, applied in two stages.
struct PreconditionerBundle
{
  DenseMatrix Rhat;  // stored at u_qr, positive diagonal
  QRFactors qr;      // of the computed sketch
  DenseMatrix sketched;
  std::optional<ColumnScaling> scaling;
  Format u_s = Format::Double;
  Format u_qr = Format::Double;
  std::shared_ptr<const SketchOperator> sketch;

  std::size_t n() const { return Rhat.cols(); }
  // Effective preconditioner at Quad (Rhat when unscaled).
  DenseMatrix effective_r() const;
};

PreconditionerBundle build_preconditioner(const DenseMatrix &A,
                                          std::shared_ptr<const SketchOperator> omega,
                                          Format u_s, Format u_qr, bool scale = false,
                                          std::optional<double> theta = std::nullopt);

// P^{-1} v and P^{-T} v for the effective preconditioner P, at fmt.
Vector precond_solve(const PreconditionerBundle &bundle, std::span<const Real> v, Format fmt);
Vector precond_solve_transpose(const PreconditionerBundle &bundle, std::span<const Real> v,
                               Format fmt);

// x = P^{-1} Q^T (Omega b): Omega b at u_s, Q^T at u_qr, triangular solve at u.
Vector sketch_and_solve_init(const PreconditionerBundle &bundle, std::span<const Real> b,
                             Format u);

// kappa of [[alpha I, B], [B^T, 0]] for B with extreme singular values
// sigma_max, sigma_min; B is m x n with m > n.
double augmented_cond_formula(double sigma_max, double sigma_min, double alpha);

struct BoundPair
{
  double bound = 0.0;
  double measured = 0.0;
  bool holds() const { return measured <= bound; }
};

struct BoundReport
{
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t s = 0;
  Format u_s = Format::Double;
  Format u_qr = Format::Double;
  double alpha = 1.0;

  double beta = 0.0;
  double gamma_qr = 0.0;
  double hypothesis_qr = 0.0;      // must be < 1
  double hypothesis_sketch = 0.0;  // must be < 1
  bool hypotheses_hold = false;

  // Inputs measured at Quad.
  double norm_omega_a = 0.0;
  double pinv_omega_a = 0.0;
  double cond_omega_a = 0.0;
  double cond_sketched = 0.0;
  double norm_delta_s = 0.0;
  double norm_ar = 0.0;  // exact R
  double pinv_ar = 0.0;
  double cond_ar = 0.0;
  double cond_a = 0.0;

  BoundPair norm_rhat;          // |Rhat| <= beta |Omega A|
  BoundPair norm_rhat_inv;      // |Rhat^{-1}| <= beta |(Omega A)^+|
  BoundPair cond_rhat;          // kappa(Rhat) <= beta^2 kappa(Omega A)
  BoundPair norm_arhat;         // |A Rhat^{-1}| <= beta |A R^{-1}|
  BoundPair pinv_arhat;         // |(A Rhat^{-1})^+| <= beta |(A R^{-1})^+|
  BoundPair cond_arhat;         // kappa(A Rhat^{-1}) <= beta^2 kappa(A R^{-1})
  BoundPair cond_no_scaling;    // augmented kappa, alpha = 1, vs the case bound
  BoundPair cond_bjorck;        // augmented kappa, optimal alpha, vs 2 kappa(A Rhat^{-1})

  double cond_augmented = 0.0;          // at the requested alpha
  double cond_augmented_formula = 0.0;  // closed form at the requested alpha
  bool augmented_explicit = false;

  double psi = 0.0;
  double fe_condition_scaled_out = 0.0;  // no-scaling forward error condition lhs
  double fe_condition_optimal = 0.0;     // optimal-alpha forward error condition lhs
  double be_condition = 0.0;             // backward error condition lhs

  bool bounds_hold() const;
};

struct BoundOptions
{
  std::optional<double> alpha;
  std::size_t explicit_limit = 2000;  // m + n at or below: explicit augmented matrix
  std::size_t max_rows = 4000;
};

BoundReport evaluate_bounds(const DenseMatrix &A, const PreconditionerBundle &bundle,
                            const BoundOptions &opts = {});

// Explicit preconditioned augmented matrix [[alpha I, B], [B^T, 0]] at Quad.
DenseMatrix preconditioned_augmented(const DenseMatrix &B, double alpha);

std::vector<std::string> bound_report_header();
std::vector<std::string> bound_report_row(const BoundReport &r);
std::string to_json(const BoundReport &r);

}  // namespace sketchir

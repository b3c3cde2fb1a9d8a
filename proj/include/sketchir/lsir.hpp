// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sketchir/oracle.hpp"
#include "sketchir/solvers.hpp"

namespace sketchir
{

struct LSIRConfig
{
  Format u = Format::Double;
  Format u_r = Format::Quad;
  KrylovConfig fgmres;  // u, u_a, u_l, u_r of the inner solver
  int max_refinement_iters = 30;
  bool escalate_on_stall = true;
  // Inner iteration limit after escalation; unset keeps fgmres.max_iters.
  std::optional<int> escalated_max_iters = 80;
  // Rerun the loop from the LSQR iterate instead of the current one.
  bool restart_on_escalation = false;
  // Refinement steps performed after convergence, recorded in LSIRTrace::extra.
  int forced_steps = 0;
  // Scale the identity block by 2^{-1/2} sigma_min(A P^{-1}).
  bool optimal_alpha = false;

  double lsqr_tol = 1e-12;
  int lsqr_max_iters = 200;

  void validate() const;
};

// Section 5 defaults for working precision u: u_r = u^2, inner precisions u,
// tolerances 1e-6 (single) or 1e-12 (double), LSQR limit 2n.
LSIRConfig default_lsir_config(Format u, std::size_t n);

struct LSIRStep
{
  int step = 0;
  double fe_x = 0.0;
  double fe_r = 0.0;
  int fgmres_iters = 0;
  bool escalated = false;
  Termination termination = Termination::MaxIters;
};

enum class LSIROutcome
{
  Converged,
  MaxIters
};

struct LSIRTrace
{
  std::vector<LSIRStep> steps;  // steps[0] is the LSQR iterate
  std::vector<LSIRStep> extra;  // forced steps after convergence
  LSIROutcome outcome = LSIROutcome::MaxIters;
  bool escalated = false;
  // Counts of the final phase (the rerun when escalated).
  int lsir_iters = 0;
  int total_fgmres_iters = 0;
  double fe_x = 0.0;
  double fe_r = 0.0;

  double init_fe_x = 0.0;  // sketch-and-solve
  double init_fe_r = 0.0;
  int lsqr_iters = 0;
  double lsqr_fe_x = 0.0;
  double lsqr_fe_r = 0.0;

  Vector x;
  Vector r;
};

struct AugmentedResidual
{
  Vector f;  // b - r - A x
  Vector g;  // -A^T r
  Vector h;  // P^{-T} g
};

AugmentedResidual augmented_residual(const DenseMatrix &A, std::span<const Real> b,
                                     std::span<const Real> r, std::span<const Real> x,
                                     const PreconditionerBundle &bundle, Format u_r);

// d + delta at u.
Vector update(std::span<const Real> d, std::span<const Real> delta, Format u);

// Both relative errors <= 4u (inclusive), norms at Quad.
bool converged(std::span<const Real> x, std::span<const Real> r, const ReferenceSolution &ref,
               Format u);

// Refinement from a given preconditioner and warm start.
LSIRTrace lsir_refine(const DenseMatrix &A, std::span<const Real> b,
                      const PreconditionerBundle &bundle, std::span<const Real> x_init,
                      const LSIRConfig &cfg, const ReferenceSolution &ref, double kappa_a,
                      Format u_s);

// Full pipeline: sketch and QR, sketch-and-solve, LSQR, refinement.
LSIRTrace lsir_run(const DenseMatrix &A, std::span<const Real> b,
                   std::shared_ptr<const SketchOperator> omega, Format u_s, Format u_qr,
                   const LSIRConfig &cfg, const ReferenceSolution &ref,
                   std::optional<double> kappa_a = std::nullopt, bool scale = false);

std::vector<std::string> lsir_csv_header();

}  // namespace sketchir

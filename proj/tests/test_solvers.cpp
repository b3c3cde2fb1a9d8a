// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace sketchir;
using namespace sketchir::test;

namespace
{

// A and b in the working precision with their Quad reference, as the
// experiment protocol prepares them.
struct Problem
{
  DenseMatrix A;
  Vector b;
  ReferenceSolution ref;
};

Problem working_problem(std::size_t m, std::size_t n, double kappa, std::uint64_t seed, Format u)
{
  const ProblemInstance p = make_problem(m, n, kappa, seed);
  Problem out{round_matrix(p.A, u, nullptr, true), round_vector(p.b, u), {}};
  out.ref = reference_solution(out.A, out.b, false);
  return out;
}

std::shared_ptr<const SketchOperator> gaussian_for(const DenseMatrix &A, std::uint64_t seed)
{
  return std::make_shared<const SketchOperator>(
      make_gaussian(4 * A.cols(), A.rows(), seed, GaussianConvention::Paper, A.cols()));
}

// Bundle whose preconditioner is exactly the identity.
PreconditionerBundle identity_bundle(std::size_t m, std::size_t n)
{
  PreconditionerBundle b;
  b.Rhat = DenseMatrix::identity(n);
  b.sketch = std::make_shared<const SketchOperator>(make_identity(m));
  return b;
}

Vector concat(std::span<const Real> a, std::span<const Real> b)
{
  Vector v(a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  return v;
}

double norm(std::span<const Real> v) { return to_double(nrm2(v, Format::Quad)); }

// Left-preconditioned augmented right-hand side at an LSQR iterate, as the
// refinement loop forms it.
Vector refinement_rhs(const Problem &p, const PreconditionerBundle &bundle, std::span<const Real> x)
{
  const Vector r = sub(p.b, matvec(p.A, x, Format::Double), Format::Double);
  const AugmentedResidual res = augmented_residual(p.A, p.b, r, x, bundle, Format::Quad);
  return round_vector(concat(res.f, res.h), Format::Double);
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(Lsqr, SingleSketchSingleWorkingPublishedRow)
{
  const Problem p = working_problem(1000, 100, 1e2, 1, Format::Single);
  const PreconditionerBundle bundle = build_preconditioner(p.A, gaussian_for(p.A, 1), Format::Single,
                                                           Format::Single);
  KrylovConfig cfg;
  cfg.u = Format::Single;
  cfg.tol = 1e-6;
  cfg.max_iters = 200;
  const LsqrResult res =
      lsqr_right_precond(p.A, p.b, bundle, sketch_and_solve_init(bundle, p.b, Format::Single), cfg);
  EXPECT_NEAR(res.trace.iterations, 16, 5);
  const double fe_x = relative_error(res.x, p.ref.x_star);
  const Vector r = sub(p.b, matvec(p.A, res.x, Format::Single), Format::Single);
  const double fe_r = relative_error(r, p.ref.r_star);
  EXPECT_GE(fe_x, 1.04e-5 / 10);
  EXPECT_LE(fe_x, 1.04e-5 * 10);
  EXPECT_GE(fe_r, 3.15e-6 / 10);
  EXPECT_LE(fe_r, 3.15e-6 * 10);
}

TEST(Lsqr, OrthonormalExactPreconditioner)
{
  const DenseMatrix Q = explicit_q(householder_qr(random_matrix(60, 6, 1), Format::Quad), Format::Double);
  const Vector b = matvec(Q, random_vector(6, 2), Format::Double);
  KrylovConfig cfg;
  cfg.tol = 1e-14;
  cfg.max_iters = 12;
  const LsqrResult res = lsqr_right_precond(Q, b, identity_bundle(60, 6), Vector(6), cfg);
  EXPECT_LE(res.trace.iterations, 2);
  const Vector r = sub(b, matvec(Q, res.x, Format::Quad), Format::Quad);
  EXPECT_LE(norm(r) / norm(b), 10 * 0x1p-53);
}

TEST(Lsqr, HalfSketchStallsAtIterationLimit)
{
  const Problem p = working_problem(1000, 100, 1e6, 1, Format::Double);
  const PreconditionerBundle bundle = build_preconditioner(p.A, gaussian_for(p.A, 1), Format::Half,
                                                           Format::Double);
  KrylovConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iters = 200;
  const LsqrResult res =
      lsqr_right_precond(p.A, p.b, bundle, sketch_and_solve_init(bundle, p.b, Format::Double), cfg);
  EXPECT_EQ(res.trace.iterations, 200);
  EXPECT_EQ(res.trace.termination, Termination::MaxIters);
  const double fe_x = relative_error(res.x, p.ref.x_star);
  EXPECT_GE(fe_x, 0.745 / 10);
  EXPECT_LE(fe_x, 0.745 * 10);
}

TEST(Lsqr, ExactPreconditionerConvergesQuickly)
{
  for (double kappa : {1e0, 1e2, 1e4, 1e6})
  {
    const Problem p = working_problem(400, 40, kappa, 3, Format::Double);
    const auto omega = std::make_shared<const SketchOperator>(make_identity(400));
    const PreconditionerBundle bundle = build_preconditioner(p.A, omega, Format::Double, Format::Double);
    KrylovConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iters = 80;
    const LsqrResult res = lsqr_right_precond(p.A, p.b, bundle, Vector(40), cfg);
    EXPECT_EQ(res.trace.termination, Termination::Tolerance) << kappa;
    EXPECT_LE(res.trace.iterations, 5) << kappa;
    // Least-squares optimality |B^T r| / (|B| |r|) with B = A P^{-1}, at Quad.
    const Vector r = sub(p.b, matvec(p.A, res.x, Format::Quad), Format::Quad);
    const Vector g = tri_solve(bundle.Rhat, matvec(p.A, r, Format::Quad, true), true, Format::Quad);
    const double nb = svd_values(right_tri_solve(p.A, bundle.Rhat, Format::Quad)).max();
    // Storing x at u adds delta with |delta| <= u |x|, which alone contributes
    // up to u |A| |x| / |r| to the ratio.
    const double floor = 10 * 0x1p-53 * svd_values(p.A).max() * norm(res.x) / norm(r);
    EXPECT_LE(norm(g) / (nb * norm(r)), 1e-12 + floor) << kappa;
  }
}

TEST(Lsqr, ReturnsOriginalVariables)
{
  // With a column-scaled bundle the iterate must still solve the original problem.
  const Problem p = working_problem(300, 20, 1e4, 4, Format::Double);
  const PreconditionerBundle bundle = build_preconditioner(p.A, gaussian_for(p.A, 4), Format::Half,
                                                           Format::Double, true);
  KrylovConfig cfg;
  cfg.max_iters = 200;
  const LsqrResult res = lsqr_right_precond(p.A, p.b, bundle, Vector(20), cfg);
  EXPECT_EQ(res.trace.termination, Termination::Tolerance);
  EXPECT_LE(relative_error(res.x, p.ref.x_star), 1e-7);
}

TEST(ApplyAugmented, BlockStructure)
{
  const DenseMatrix A = random_matrix(7, 3, 5);
  for (const Real &x : apply_augmented(A, Vector(10), Format::Double))
  {
    EXPECT_EQ(x.hi, 0.0);
  }
  Vector v(10);
  const Vector vr = random_vector(7, 6);
  std::copy(vr.begin(), vr.end(), v.begin());
  const Vector out = apply_augmented(A, v, Format::Double);
  const Vector atv = matvec(A, vr, Format::Double, true);
  for (std::size_t i = 0; i < 7; ++i)
  {
    EXPECT_EQ(out[i].hi, vr[i].hi);
  }
  for (std::size_t j = 0; j < 3; ++j)
  {
    EXPECT_EQ(out[7 + j].hi, atv[j].hi);
  }
}

TEST(ApplyAugmented, ComponentwiseAccuracy)
{
  const std::size_t m = 200;
  const std::size_t n = 20;
  const DenseMatrix A = random_matrix(m, n, 7);
  const Vector v = random_vector(m + n, 8);
  const Vector got = apply_augmented(A, v, Format::Double);
  const Vector ref = apply_augmented(A, v, Format::Quad);
  // Componentwise amplification (|I||v_r| + |A||v_x|, |A^T||v_r|) / |result|.
  for (std::size_t i = 0; i < m + n; ++i)
  {
    double mag = 0;
    if (i < m)
    {
      mag = std::abs(v[i].hi);
      for (std::size_t j = 0; j < n; ++j)
      {
        mag += std::abs(A.at(i, j) * v[m + j].hi);
      }
    }
    else
    {
      for (std::size_t k = 0; k < m; ++k)
      {
        mag += std::abs(A.at(k, i - m) * v[k].hi);
      }
    }
    const double amp = mag / std::abs(to_double(ref[i]));
    EXPECT_LE(std::abs(to_double(got[i] - ref[i])) / std::abs(to_double(ref[i])),
              static_cast<double>(m + n) * 0x1p-53 * amp)
        << i;
  }
}

TEST(SplitPrecond, IdentityLeavesVectorUnchanged)
{
  const PreconditionerBundle b = identity_bundle(8, 3);
  const Vector v = random_vector(11, 9);
  for (Side side : {Side::Left, Side::Right})
  {
    const Vector out = apply_split_precond(b, side, v, Format::Double);
    for (std::size_t i = 0; i < 11; ++i)
    {
      EXPECT_EQ(out[i].hi, v[i].hi);
      EXPECT_EQ(out[i].lo, v[i].lo);
    }
  }
}

TEST(SplitPrecond, LeftSolveInvertsTranspose)
{
  const DenseMatrix A = gen_randsvd(300, 15, 1e6, 10);
  const PreconditionerBundle b = build_preconditioner(A, gaussian_for(A, 10), Format::Single,
                                                      Format::Double);
  const Vector v = random_vector(315, 11);
  for (Format f : {Format::Single, Format::Double})
  {
    const Vector vin = round_vector(v, f);
    const Vector out = apply_split_precond(b, Side::Left, vin, f);
    for (std::size_t i = 0; i < 300; ++i)
    {
      ASSERT_EQ(out[i].hi, vin[i].hi) << i;
    }
    const Vector w(out.begin() + 300, out.end());
    const Vector vx(vin.begin() + 300, vin.end());
    // R^T w at Quad against v_x: the backward error of substitution.
    const DenseMatrix Rt = DenseMatrix::adopt(15, 15, Vector(b.Rhat.data().begin(), b.Rhat.data().end()),
                                              Format::Quad);
    const Vector back = matvec(Rt, w, Format::Quad, true);
    const double bound = 2 * 15 * unit_roundoff(f) * norm2(b.Rhat) * norm(w);
    EXPECT_LE(norm(sub(back, vx, Format::Quad)), bound) << to_string(f);
    const Vector right = apply_split_precond(b, Side::Right, vin, f);
    for (std::size_t i = 0; i < 300; ++i)
    {
      ASSERT_EQ(right[i].hi, vin[i].hi) << i;
    }
  }
}

TEST(Fgmres, RecoversKnownSolution)
{
  const std::size_t m = 30;
  const std::size_t n = 5;
  const DenseMatrix Q = explicit_q(householder_qr(random_matrix(m, n, 12), Format::Quad), Format::Double);
  const Vector e = random_vector(m + n, 13);
  const Vector rhs = round_vector(apply_augmented(Q, e, Format::Quad), Format::Double);
  KrylovConfig cfg;
  cfg.tol = 1e-15;
  cfg.max_iters = static_cast<int>(m + n);
  const FgmresResult res = fgmres_augmented(Q, identity_bundle(m, n), rhs, cfg);
  const Vector got = concat(res.delta_r, res.delta_x);
  EXPECT_LE(relative_error(got, e), 10 * 0x1p-53);
  // sigma(Q) = 1: the augmented spectrum is {1, (1 +- sqrt 5) / 2}.
  EXPECT_LE(res.trace.iterations, 3);
}

TEST(Fgmres, ResidualMonotoneAndOrthogonal)
{
  const std::pair<double, Format> cases[] = {{1e4, Format::Half}, {1e8, Format::Single},
                                             {1e12, Format::Double}};
  std::uint64_t seed = 14;
  for (const auto &[kappa, us] : cases)
  {
    const Problem p = working_problem(500, 50, kappa, seed, Format::Double);
    const PreconditionerBundle bundle = build_preconditioner(p.A, gaussian_for(p.A, seed), us,
                                                             Format::Double);
    KrylovConfig lc;
    lc.max_iters = 100;
    const LsqrResult ls = lsqr_right_precond(p.A, p.b, bundle,
                                             sketch_and_solve_init(bundle, p.b, Format::Double), lc);
    const Vector rhs = refinement_rhs(p, bundle, ls.x);
    for (bool reorth : {false, true})
    {
      KrylovConfig cfg;
      cfg.max_iters = 50;
      cfg.reorthogonalize = reorth;
      const FgmresResult res = fgmres_augmented(p.A, bundle, rhs, cfg);
      const auto &h = res.trace.residual_history;
      for (std::size_t k = 1; k < h.size(); ++k)
      {
        EXPECT_LE(h[k], h[k - 1]) << kappa << " step " << k;
      }
      const double bound = 1e3 * res.trace.iterations * 0x1p-53;
      // Plain MGS loses orthogonality in proportion to the operator's
      // conditioning; the second pass is the remedy and must meet the bound.
      if (reorth)
      {
        EXPECT_LE(res.trace.orthogonality_loss, bound) << kappa;
      }
      else
      {
        RecordProperty("mgs_loss_" + std::to_string(seed), std::to_string(res.trace.orthogonality_loss));
      }
    }
    ++seed;
  }
}

TEST(Fgmres, ToleranceMeansTrueResidual)
{
  const Problem p = working_problem(500, 50, 1e6, 17, Format::Double);
  const PreconditionerBundle bundle = build_preconditioner(p.A, gaussian_for(p.A, 17), Format::Single,
                                                           Format::Double);
  const Vector rhs = refinement_rhs(p, bundle, sketch_and_solve_init(bundle, p.b, Format::Double));
  KrylovConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iters = 50;
  const FgmresResult res = fgmres_augmented(p.A, bundle, rhs, cfg);
  ASSERT_EQ(res.trace.termination, Termination::Tolerance);
  // M_L^{-1} A_aug (delta_r, delta_x) at Quad against the right-hand side.
  const Vector applied = apply_split_precond(
      bundle, Side::Left, apply_augmented(p.A, concat(res.delta_r, res.delta_x), Format::Quad),
      Format::Quad);
  EXPECT_LE(norm(sub(rhs, applied, Format::Quad)) / norm(rhs), cfg.tol);
}

TEST(Fgmres, SingleSketchOneStepUnderFifty)
{
  const Problem p = working_problem(1000, 100, 1e6, 1, Format::Double);
  LSIRConfig cfg = default_lsir_config(Format::Double, 100);
  const LSIRTrace tr = lsir_run(p.A, p.b, gaussian_for(p.A, 1), Format::Single, Format::Double, cfg,
                                p.ref, 1e6);
  EXPECT_EQ(tr.outcome, LSIROutcome::Converged);
  EXPECT_EQ(tr.lsir_iters, 1);
  EXPECT_LE(tr.total_fgmres_iters, 50);
}

TEST(Fgmres, HigherInternalPrecisionNeverHurts)
{
  // kappa(A) = 1e12 with a double sketch: the regime where the inner
  // precisions, not the iteration budget, limit the refinement.
  std::vector<double> low;
  std::vector<double> high;
  int better = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    const Problem p = working_problem(500, 50, 1e12, seed, Format::Double);
    const auto omega = gaussian_for(p.A, seed);
    LSIRConfig cfg = default_lsir_config(Format::Double, 50);
    cfg.escalate_on_stall = false;
    cfg.max_refinement_iters = 5;
    low.push_back(lsir_run(p.A, p.b, omega, Format::Double, Format::Double, cfg, p.ref, 1e12).fe_r);
    cfg.fgmres.u_a = cfg.fgmres.u_l = cfg.fgmres.u_r = Format::Quad;
    high.push_back(lsir_run(p.A, p.b, omega, Format::Double, Format::Double, cfg, p.ref, 1e12).fe_r);
    better += high.back() <= low.back();
  }
  EXPECT_LE(median(high), median(low)) << "low " << median(low) << " high " << median(high);
  EXPECT_GE(better, 4);
}

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/lsir.hpp"

#include <cmath>

namespace sketchir
{

void LSIRConfig::validate() const
{
  if (finer(u, u_r))
  {
    throw Error(ErrorCode::InvalidArgument, "residual precision must not be coarser than u");
  }
  if (max_refinement_iters < 0 || forced_steps < 0 || lsqr_max_iters < 1)
  {
    throw Error(ErrorCode::InvalidArgument, "iteration limits must be nonnegative");
  }
  fgmres.validate();
}

LSIRConfig default_lsir_config(Format u, std::size_t n)
{
  LSIRConfig cfg;
  cfg.u = u;
  cfg.u_r = squared(u);
  const double tol = u == Format::Single || u == Format::Half ? 1e-6 : 1e-12;
  cfg.lsqr_tol = tol;
  cfg.lsqr_max_iters = static_cast<int>(2 * n);
  cfg.fgmres.u = u;
  cfg.fgmres.u_a = u;
  cfg.fgmres.u_l = u;
  cfg.fgmres.u_r = u;
  cfg.fgmres.tol = tol;
  cfg.fgmres.max_iters = 50;
  return cfg;
}

AugmentedResidual augmented_residual(const DenseMatrix &A, std::span<const Real> b,
                                     std::span<const Real> r, std::span<const Real> x,
                                     const PreconditionerBundle &bundle, Format u_r)
{
  if (b.size() != A.rows() || r.size() != A.rows() || x.size() != A.cols())
  {
    throw Error(ErrorCode::DimensionMismatch, "residual operands do not conform");
  }
  AugmentedResidual out;
  const Vector ax = matvec(A, x, u_r);
  out.f = sub(sub(b, r, u_r), ax, u_r);
  out.g = matvec(A, r, u_r, true);
  for (auto &gi : out.g)
  {
    gi = -gi;
  }
  out.h = precond_solve_transpose(bundle, out.g, u_r);
  return out;
}

Vector update(std::span<const Real> d, std::span<const Real> delta, Format u)
{
  return add(d, delta, u);
}

bool converged(std::span<const Real> x, std::span<const Real> r, const ReferenceSolution &ref,
               Format u)
{
  const double lim = 4.0 * unit_roundoff(u);
  return relative_error(x, ref.x_star) <= lim && relative_error(r, ref.r_star) <= lim;
}

namespace
{

LSIRStep record(int step, std::span<const Real> x, std::span<const Real> r,
                const ReferenceSolution &ref)
{
  LSIRStep s;
  s.step = step;
  s.fe_x = relative_error(x, ref.x_star);
  s.fe_r = relative_error(r, ref.r_star);
  return s;
}

struct Iterate
{
  Vector x;
  Vector r;
};

// One refinement step; returns the inner solve's trace.
SolveTrace refine_once(const DenseMatrix &A, std::span<const Real> b,
                       const PreconditionerBundle &bundle, const LSIRConfig &cfg,
                       const KrylovConfig &inner, Iterate &it)
{
  const AugmentedResidual res = augmented_residual(A, b, it.r, it.x, bundle, cfg.u_r);
  Vector rhs(res.f.begin(), res.f.end());
  rhs.insert(rhs.end(), res.h.begin(), res.h.end());
  rhs = round_vector(rhs, cfg.u);
  FgmresResult corr = fgmres_augmented(A, bundle, rhs, inner);
  if (inner.alpha != 1.0)
  {
    scal(Real(inner.alpha), corr.delta_r, cfg.u);
  }
  it.r = update(it.r, corr.delta_r, cfg.u);
  it.x = update(it.x, corr.delta_x, cfg.u);
  return corr.trace;
}

}  // namespace

LSIRTrace lsir_refine(const DenseMatrix &A, std::span<const Real> b,
                      const PreconditionerBundle &bundle, std::span<const Real> x_init,
                      const LSIRConfig &cfg, const ReferenceSolution &ref, double kappa_a,
                      Format u_s)
{
  cfg.validate();
  LSIRTrace tr;
  tr.init_fe_x = relative_error(x_init, ref.x_star);
  tr.init_fe_r = relative_error(sub(b, matvec(A, x_init, Format::Quad), Format::Quad), ref.r_star);

  KrylovConfig lsqr_cfg;
  lsqr_cfg.u = cfg.u;
  lsqr_cfg.tol = cfg.lsqr_tol;
  lsqr_cfg.max_iters = cfg.lsqr_max_iters;
  const LsqrResult ls = lsqr_right_precond(A, b, bundle, x_init, lsqr_cfg);

  Iterate it;
  it.x = ls.x;
  it.r = sub(b, matvec(A, it.x, cfg.u), cfg.u);
  tr.lsqr_iters = ls.trace.iterations;
  const LSIRStep step0 = record(0, it.x, it.r, ref);
  tr.lsqr_fe_x = step0.fe_x;
  tr.lsqr_fe_r = step0.fe_r;
  tr.steps.push_back(step0);
  const Iterate warm = it;

  KrylovConfig inner = cfg.fgmres;
  inner.u = cfg.u;
  if (cfg.optimal_alpha)
  {
    const DenseMatrix B = right_tri_solve(A, bundle.effective_r(), Format::Quad);
    inner.alpha = svd_values(B).min() / std::sqrt(2.0);
  }

  auto run_loop = [&](bool escalated) {
    int iters = 0;
    int fgmres_total = 0;
    bool ok = converged(it.x, it.r, ref, cfg.u);
    while (!ok && iters < cfg.max_refinement_iters)
    {
      const SolveTrace st = refine_once(A, b, bundle, cfg, inner, it);
      ++iters;
      fgmres_total += st.iterations;
      LSIRStep s = record(iters, it.x, it.r, ref);
      s.fgmres_iters = st.iterations;
      s.escalated = escalated;
      s.termination = st.termination;
      tr.steps.push_back(s);
      ok = converged(it.x, it.r, ref, cfg.u);
    }
    tr.lsir_iters = iters;
    tr.total_fgmres_iters = fgmres_total;
    return ok;
  };

  bool ok = run_loop(false);
  if (!ok && cfg.escalate_on_stall && kappa_a < 1.0 / unit_roundoff(u_s))
  {
    tr.escalated = true;
    const Format hi = squared(cfg.u);
    inner.u_a = hi;
    inner.u_l = hi;
    inner.u_r = hi;
    if (cfg.escalated_max_iters)
    {
      inner.max_iters = *cfg.escalated_max_iters;
    }
    if (cfg.restart_on_escalation)
    {
      it = warm;
    }
    ok = run_loop(true);
  }
  tr.outcome = ok ? LSIROutcome::Converged : LSIROutcome::MaxIters;
  const LSIRStep last = record(tr.lsir_iters, it.x, it.r, ref);
  tr.fe_x = last.fe_x;
  tr.fe_r = last.fe_r;

  if (ok)
  {
    for (int k = 1; k <= cfg.forced_steps; ++k)
    {
      const SolveTrace st = refine_once(A, b, bundle, cfg, inner, it);
      LSIRStep s = record(tr.lsir_iters + k, it.x, it.r, ref);
      s.fgmres_iters = st.iterations;
      s.escalated = tr.escalated;
      s.termination = st.termination;
      tr.extra.push_back(s);
    }
  }
  tr.x = std::move(it.x);
  tr.r = std::move(it.r);
  return tr;
}

LSIRTrace lsir_run(const DenseMatrix &A, std::span<const Real> b,
                   std::shared_ptr<const SketchOperator> omega, Format u_s, Format u_qr,
                   const LSIRConfig &cfg, const ReferenceSolution &ref,
                   std::optional<double> kappa_a, bool scale)
{
  const PreconditionerBundle bundle = build_preconditioner(A, std::move(omega), u_s, u_qr, scale);
  const Vector xs = sketch_and_solve_init(bundle, b, cfg.u);
  const double kappa = kappa_a ? *kappa_a : ref.kappa();
  return lsir_refine(A, b, bundle, xs, cfg, ref, kappa, u_s);
}

std::vector<std::string> lsir_csv_header()
{
  return {"seed", "kappa",      "u_s",       "u_qr",      "u",    "u_r",
          "lsir_iters", "fgmres_total", "converged", "escalated", "fe_x", "fe_r"};
}

}  // namespace sketchir

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/precond.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sketchir/csv.hpp"

namespace sketchir
{

namespace
{

// sqrt(1 + x) - 1 without cancellation.
double sqrt1pm1(double x) { return x / (std::sqrt(1.0 + x) + 1.0); }

// Multiplies entry j of v by theta / column_max_j at fmt.
Vector scale_entries(const ColumnScaling &sc, std::span<const Real> v, Format fmt)
{
  return with_format(fmt, [&]<class T>() {
    const T theta = constant<T>(sc.theta);
    Vector out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
    {
      out[j] = store(T(load<T>(v[j]) * theta / load<T>(sc.column_max[j])));
    }
    return out;
  });
}

// A * theta * S at Quad.
DenseMatrix scaled_operand(const DenseMatrix &A, const std::optional<ColumnScaling> &sc)
{
  if (!sc)
  {
    return A;
  }
  std::vector<Real> d(A.data().size());
  for (std::size_t j = 0; j < A.cols(); ++j)
  {
    for (std::size_t i = 0; i < A.rows(); ++i)
    {
      d[i + j * A.rows()] = (A(i, j) / sc->column_max[j]) * Real(sc->theta);
    }
  }
  return DenseMatrix::adopt(A.rows(), A.cols(), std::move(d), Format::Quad);
}

double augmented_kappa(const DenseMatrix &B, const SingularValues &sv, double alpha,
                       bool explicit_matrix)
{
  if (explicit_matrix)
  {
    return symmetric_singular_values(preconditioned_augmented(B, alpha)).cond();
  }
  return augmented_cond_formula(sv.max(), sv.min(), alpha);
}

}  // namespace

DenseMatrix PreconditionerBundle::effective_r() const
{
  if (!scaling)
  {
    return Rhat;
  }
  const std::size_t n = Rhat.cols();
  std::vector<Real> d(n * n);
  for (std::size_t j = 0; j < n; ++j)
  {
    const Real f = scaling->column_max[j] / Real(scaling->theta);
    for (std::size_t i = 0; i <= j; ++i)
    {
      d[i + j * n] = Rhat(i, j) * f;
    }
  }
  return DenseMatrix::adopt(n, n, std::move(d), Format::Quad);
}

PreconditionerBundle build_preconditioner(const DenseMatrix &A,
                                          std::shared_ptr<const SketchOperator> omega,
                                          Format u_s, Format u_qr, bool scale,
                                          std::optional<double> theta)
{
  if (!omega)
  {
    throw Error(ErrorCode::InvalidArgument, "no sketch operator given");
  }
  PreconditionerBundle b;
  b.u_s = u_s;
  b.u_qr = u_qr;
  b.sketch = omega;
  if (scale)
  {
    auto [sc, AS] = column_scaling(A, theta.value_or(default_theta(u_s, A.rows())), u_s);
    b.scaling = std::move(sc);
    b.sketched = apply_sketch(*omega, AS, u_s);
  }
  else
  {
    b.sketched = apply_sketch(*omega, A, u_s);
  }
  try
  {
    b.qr = householder_qr(b.sketched, u_qr);
  }
  catch (const Error &e)
  {
    if (e.code() == ErrorCode::ZeroColumn)
    {
      throw Error(ErrorCode::RankDeficientSketch, e.what());
    }
    throw;
  }
  b.Rhat = b.qr.R;
  return b;
}

Vector precond_solve(const PreconditionerBundle &bundle, std::span<const Real> v, Format fmt)
{
  Vector x = tri_solve(bundle.Rhat, v, false, fmt);
  if (bundle.scaling)
  {
    x = scale_entries(*bundle.scaling, x, fmt);
  }
  return x;
}

Vector precond_solve_transpose(const PreconditionerBundle &bundle, std::span<const Real> v,
                               Format fmt)
{
  if (bundle.scaling)
  {
    const Vector w = scale_entries(*bundle.scaling, v, fmt);
    return tri_solve(bundle.Rhat, w, true, fmt);
  }
  return tri_solve(bundle.Rhat, v, true, fmt);
}

Vector sketch_and_solve_init(const PreconditionerBundle &bundle, std::span<const Real> b,
                             Format u)
{
  const Vector ob = apply_sketch(*bundle.sketch, b, bundle.u_s);
  const Vector qtb = apply_qt(bundle.qr, ob, bundle.u_qr);
  return precond_solve(bundle, qtb, u);
}

double augmented_cond_formula(double sigma_max, double sigma_min, double alpha)
{
  const double num = alpha + std::sqrt(alpha * alpha + 4.0 * sigma_max * sigma_max);
  // sqrt(a^2 + 4 s^2) - a, evaluated without cancellation.
  const double t = 4.0 * sigma_min * sigma_min;
  const double den = t / (std::sqrt(alpha * alpha + t) + alpha);
  // The eigenvalue alpha of the null space of B^T contributes 2 alpha here;
  // the often-quoted min{2, .} is the alpha = 1 case.
  return num / std::min(2.0 * alpha, den);
}

DenseMatrix preconditioned_augmented(const DenseMatrix &B, double alpha)
{
  const std::size_t m = B.rows();
  const std::size_t n = B.cols();
  const std::size_t N = m + n;
  std::vector<Real> d(N * N);
  for (std::size_t i = 0; i < m; ++i)
  {
    d[i + i * N] = Real(alpha);
  }
  for (std::size_t j = 0; j < n; ++j)
  {
    for (std::size_t i = 0; i < m; ++i)
    {
      d[i + (m + j) * N] = B(i, j);
      d[(m + j) + i * N] = B(i, j);
    }
  }
  return DenseMatrix::adopt(N, N, std::move(d), Format::Quad);
}

bool BoundReport::bounds_hold() const
{
  return norm_rhat.holds() && norm_rhat_inv.holds() && cond_rhat.holds() && norm_arhat.holds() &&
         pinv_arhat.holds() && cond_arhat.holds();
}

BoundReport evaluate_bounds(const DenseMatrix &A, const PreconditionerBundle &bundle,
                            const BoundOptions &opts)
{
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  if (m > opts.max_rows)
  {
    throw Error(ErrorCode::ProblemTooLargeForExactDiagnostics,
                std::to_string(m) + " rows exceed the diagnostics limit of " +
                    std::to_string(opts.max_rows));
  }
  BoundReport r;
  r.m = m;
  r.n = n;
  r.s = bundle.sketch->s;
  r.u_s = bundle.u_s;
  r.u_qr = bundle.u_qr;

  const DenseMatrix At = scaled_operand(A, bundle.scaling);
  const DenseMatrix OA = exact_sketch(*bundle.sketch, At);
  const SingularValues sv_oa = svd_values(OA);
  r.norm_omega_a = sv_oa.max();
  r.pinv_omega_a = sv_oa.pinv_norm();
  r.cond_omega_a = sv_oa.cond();
  r.cond_sketched = svd_values(bundle.sketched).cond();
  r.norm_delta_s = norm2(difference(bundle.sketched, OA));
  const SingularValues sv_a = svd_values(A);
  r.cond_a = sv_a.cond();

  const DenseMatrix R = householder_qr(OA, Format::Quad).R;
  const SingularValues sv_ar = svd_values(right_tri_solve(At, R, Format::Quad));
  r.norm_ar = sv_ar.max();
  r.pinv_ar = sv_ar.pinv_norm();
  r.cond_ar = sv_ar.cond();

  const double dn = static_cast<double>(n);
  const double lead = (2.0 * std::log2(dn) + 4.0) * std::sqrt(dn);
  r.gamma_qr = gamma_tilde(static_cast<double>(r.s) * dn, bundle.u_qr);
  r.hypothesis_qr = lead * r.gamma_qr * r.cond_sketched;
  r.hypothesis_sketch = lead * r.pinv_omega_a * r.norm_delta_s;
  r.hypotheses_hold = r.hypothesis_qr < 1.0 && r.hypothesis_sketch < 1.0;
  r.beta = (1.0 + 18.0 * lead * r.gamma_qr * r.cond_omega_a) *
           (1.0 + 2.0 * lead * r.pinv_omega_a * r.norm_delta_s);

  const SingularValues sv_r = svd_values(bundle.Rhat);
  const DenseMatrix B = right_tri_solve(At, bundle.Rhat, Format::Quad);
  const SingularValues sv_b = svd_values(B);
  const double beta = r.beta;
  r.norm_rhat = {beta * r.norm_omega_a, sv_r.max()};
  r.norm_rhat_inv = {beta * r.pinv_omega_a, sv_r.pinv_norm()};
  r.cond_rhat = {beta * beta * r.cond_omega_a, sv_r.cond()};
  r.norm_arhat = {beta * r.norm_ar, sv_b.max()};
  r.pinv_arhat = {beta * r.pinv_ar, sv_b.pinv_norm()};
  r.cond_arhat = {beta * beta * r.cond_ar, sv_b.cond()};

  r.augmented_explicit = m + n <= opts.explicit_limit;
  r.alpha = opts.alpha.value_or(1.0);
  r.cond_augmented = augmented_kappa(B, sv_b, r.alpha, r.augmented_explicit);
  r.cond_augmented_formula = augmented_cond_formula(sv_b.max(), sv_b.min(), r.alpha);

  const double norm_b = sv_b.max();
  const double pinv_b = sv_b.pinv_norm();
  const double case_bound = pinv_b <= 1.0 / std::sqrt(2.0)
                                ? 1.0 + norm_b
                                : (2.0 + 2.0 * norm_b) / sqrt1pm1(4.0 / (pinv_b * pinv_b));
  r.cond_no_scaling = {case_bound, r.alpha == 1.0 ? r.cond_augmented
                                                  : augmented_kappa(B, sv_b, 1.0,
                                                                    r.augmented_explicit)};
  const double alpha_opt = sv_b.min() / std::sqrt(2.0);
  r.cond_bjorck = {2.0 * sv_b.cond(), r.alpha == alpha_opt
                                          ? r.cond_augmented
                                          : augmented_kappa(B, sv_b, alpha_opt,
                                                            r.augmented_explicit)};

  r.psi = beta * std::max({r.norm_omega_a, r.pinv_omega_a, beta * r.cond_omega_a});
  const double amp = std::max(1.0, 1.0 / sqrt1pm1(4.0 / (beta * r.pinv_ar * r.pinv_ar)));
  r.fe_condition_scaled_out = beta * amp * r.norm_ar * r.psi;
  r.fe_condition_optimal = beta * beta * r.cond_ar * r.psi;
  r.be_condition = r.psi * augmented_cond_formula(sv_a.max(), sv_a.min(), 1.0);
  return r;
}

std::vector<std::string> bound_report_header()
{
  return {"m",
          "n",
          "s",
          "u_s",
          "u_qr",
          "alpha",
          "beta",
          "hyp_qr",
          "hyp_sketch",
          "hypotheses_hold",
          "norm_delta_s",
          "cond_a",
          "norm_rhat_bound",
          "norm_rhat",
          "norm_rhat_inv_bound",
          "norm_rhat_inv",
          "cond_rhat_bound",
          "cond_rhat",
          "norm_arhat_bound",
          "norm_arhat",
          "pinv_arhat_bound",
          "pinv_arhat",
          "cond_arhat_bound",
          "cond_arhat",
          "cond_aug_no_scaling_bound",
          "cond_aug_no_scaling",
          "cond_aug_bjorck_bound",
          "cond_aug_bjorck",
          "cond_aug",
          "cond_aug_formula",
          "aug_explicit",
          "psi",
          "fe_condition",
          "fe_condition_optimal",
          "be_condition"};
}

std::vector<std::string> bound_report_row(const BoundReport &r)
{
  return {format_number(static_cast<double>(r.m)),
          format_number(static_cast<double>(r.n)),
          format_number(static_cast<double>(r.s)),
          std::string(to_string(r.u_s)),
          std::string(to_string(r.u_qr)),
          format_number(r.alpha),
          format_number(r.beta),
          format_number(r.hypothesis_qr),
          format_number(r.hypothesis_sketch),
          r.hypotheses_hold ? "1" : "0",
          format_number(r.norm_delta_s),
          format_number(r.cond_a),
          format_number(r.norm_rhat.bound),
          format_number(r.norm_rhat.measured),
          format_number(r.norm_rhat_inv.bound),
          format_number(r.norm_rhat_inv.measured),
          format_number(r.cond_rhat.bound),
          format_number(r.cond_rhat.measured),
          format_number(r.norm_arhat.bound),
          format_number(r.norm_arhat.measured),
          format_number(r.pinv_arhat.bound),
          format_number(r.pinv_arhat.measured),
          format_number(r.cond_arhat.bound),
          format_number(r.cond_arhat.measured),
          format_number(r.cond_no_scaling.bound),
          format_number(r.cond_no_scaling.measured),
          format_number(r.cond_bjorck.bound),
          format_number(r.cond_bjorck.measured),
          format_number(r.cond_augmented),
          format_number(r.cond_augmented_formula),
          r.augmented_explicit ? "1" : "0",
          format_number(r.psi),
          format_number(r.fe_condition_scaled_out),
          format_number(r.fe_condition_optimal),
          format_number(r.be_condition)};
}

std::string to_json(const BoundReport &r)
{
  nlohmann::ordered_json j;
  const auto header = bound_report_header();
  const auto row = bound_report_row(r);
  for (std::size_t i = 0; i < header.size(); ++i)
  {
    try
    {
      j[header[i]] = parse_number(row[i]);
    }
    catch (const Error &)
    {
      j[header[i]] = row[i];
    }
  }
  j["m"] = r.m;
  j["n"] = r.n;
  j["s"] = r.s;
  j["hypotheses_hold"] = r.hypotheses_hold;
  return j.dump(2);
}

}  // namespace sketchir

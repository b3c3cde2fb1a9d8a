// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/solvers.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <optional>

namespace sketchir
{

namespace
{

template <class T>
std::vector<T> to_t(std::span<const Real> v)
{
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out[i] = load<T>(v[i]);
  }
  return out;
}

template <class T>
Vector from_t(const std::vector<T> &v)
{
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out[i] = store(v[i]);
  }
  return out;
}

template <class T>
T norm(const std::vector<T> &x)
{
  using std::sqrt;
  T s(0.0);
  for (const T &xi : x)
  {
    s += xi * xi;
  }
  return sqrt(s);
}

template <class T>
T dot_t(const std::vector<T> &x, const std::vector<T> &y)
{
  T s(0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    s += x[i] * y[i];
  }
  return s;
}

template <class T>
bool all_finite(const std::vector<T> &x)
{
  for (const T &xi : x)
  {
    if (!finite(xi))
    {
      return false;
    }
  }
  return true;
}

// A loaded once into T.
template <class T>
struct DenseOp
{
  std::size_t m;
  std::size_t n;
  std::vector<T> a;

  explicit DenseOp(const DenseMatrix &A) : m(A.rows()), n(A.cols()), a(to_t<T>(A.data())) {}

  std::vector<T> mv(const std::vector<T> &x) const
  {
    std::vector<T> y(m, T(0.0));
    for (std::size_t j = 0; j < n; ++j)
    {
      const T *c = a.data() + j * m;
      const T xj = x[j];
      for (std::size_t i = 0; i < m; ++i)
      {
        y[i] += c[i] * xj;
      }
    }
    return y;
  }

  std::vector<T> mtv(const std::vector<T> &x) const
  {
    std::vector<T> y(n);
    for (std::size_t j = 0; j < n; ++j)
    {
      const T *c = a.data() + j * m;
      T s(0.0);
      for (std::size_t i = 0; i < m; ++i)
      {
        s += c[i] * x[i];
      }
      y[j] = s;
    }
    return y;
  }
};

// Effective preconditioner P = Rhat (theta S)^{-1} loaded into T.
template <class T>
struct TriOp
{
  std::size_t n;
  std::vector<T> r;
  std::vector<T> column_max;
  T theta = T(1.0);
  bool scaled = false;

  explicit TriOp(const PreconditionerBundle &b) : n(b.Rhat.cols()), r(to_t<T>(b.Rhat.data()))
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      if (b.Rhat(i, i).hi == 0.0)
      {
        throw Error(ErrorCode::SingularR, "zero diagonal entry at " + std::to_string(i));
      }
    }
    if (b.scaling)
    {
      scaled = true;
      column_max = to_t<T>(b.scaling->column_max);
      theta = constant<T>(b.scaling->theta);
    }
  }

  void scale(std::vector<T> &x) const
  {
    if (scaled)
    {
      for (std::size_t j = 0; j < n; ++j)
      {
        x[j] = x[j] * theta / column_max[j];
      }
    }
  }

  // P^{-1} x
  std::vector<T> solve(std::vector<T> x) const
  {
    for (std::size_t j = n; j-- > 0;)
    {
      const T *c = r.data() + j * n;
      x[j] = x[j] / c[j];
      const T xj = x[j];
      for (std::size_t i = 0; i < j; ++i)
      {
        x[i] -= c[i] * xj;
      }
    }
    scale(x);
    return x;
  }

  // P^{-T} x
  std::vector<T> solve_t(std::vector<T> x) const
  {
    scale(x);
    for (std::size_t i = 0; i < n; ++i)
    {
      const T *c = r.data() + i * n;
      T s = x[i];
      for (std::size_t j = 0; j < i; ++j)
      {
        s -= c[j] * x[j];
      }
      x[i] = s / c[i];
    }
    return x;
  }
};

using VecFn = std::function<Vector(std::span<const Real>)>;

VecFn make_augmented(const DenseMatrix &A, Format fmt, double alpha)
{
  return with_format(fmt, [&]<class T>() -> VecFn {
    auto op = std::make_shared<const DenseOp<T>>(A);
    const T a = constant<T>(alpha);
    return [op, a](std::span<const Real> v) {
      const std::size_t m = op->m;
      const std::size_t n = op->n;
      if (v.size() != m + n)
      {
        throw Error(ErrorCode::DimensionMismatch, "augmented operand has wrong length");
      }
      const std::vector<T> vr = to_t<T>(v.subspan(0, m));
      const std::vector<T> vx = to_t<T>(v.subspan(m));
      const std::vector<T> ax = op->mv(vx);
      const std::vector<T> atr = op->mtv(vr);
      Vector out(m + n);
      for (std::size_t i = 0; i < m; ++i)
      {
        const T first = a == T(1.0) ? vr[i] : T(a * vr[i]);
        out[i] = store(T(first + ax[i]));
      }
      for (std::size_t j = 0; j < n; ++j)
      {
        out[m + j] = store(atr[j]);
      }
      return out;
    };
  });
}

VecFn make_split(const PreconditionerBundle &bundle, Side side, Format fmt)
{
  return with_format(fmt, [&]<class T>() -> VecFn {
    auto op = std::make_shared<const TriOp<T>>(bundle);
    return [op, side](std::span<const Real> v) {
      const std::size_t n = op->n;
      if (v.size() < n)
      {
        throw Error(ErrorCode::DimensionMismatch, "split preconditioner operand too short");
      }
      const std::size_t m = v.size() - n;
      Vector out(v.begin(), v.end());
      std::vector<T> vx = to_t<T>(v.subspan(m));
      vx = side == Side::Left ? op->solve_t(std::move(vx)) : op->solve(std::move(vx));
      for (std::size_t j = 0; j < n; ++j)
      {
        out[m + j] = store(vx[j]);
      }
      return out;
    };
  });
}

template <class T>
double orthogonality_loss(const std::vector<std::vector<T>> &V, std::size_t k)
{
  dd_real total(0.0);
  for (std::size_t i = 0; i < k; ++i)
  {
    for (std::size_t j = 0; j <= i; ++j)
    {
      dd_real s(0.0);
      for (std::size_t p = 0; p < V[i].size(); ++p)
      {
        s += store(V[i][p]) * store(V[j][p]);
      }
      if (i == j)
      {
        s -= dd_real(1.0);
      }
      total += (i == j ? dd_real(1.0) : dd_real(2.0)) * s * s;
    }
  }
  return to_double(sqrt(total));
}

template <class T>
LsqrResult lsqr_impl(const DenseMatrix &A, std::span<const Real> b,
                     const PreconditionerBundle &bundle, std::span<const Real> x0,
                     const KrylovConfig &cfg)
{
  using std::abs;
  using std::sqrt;
  const DenseOp<T> op(A);
  const TriOp<T> P(bundle);
  const std::size_t n = op.n;
  const T tol = constant<T>(cfg.tol);

  LsqrResult res;
  res.x.assign(x0.begin(), x0.end());
  res.x = from_t(to_t<T>(res.x));
  SolveTrace &tr = res.trace;
  tr.residual_history.push_back(1.0);

  const std::vector<T> bt = to_t<T>(b);
  const std::vector<T> xt = to_t<T>(x0);
  std::vector<T> u = op.mv(xt);
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    u[i] = bt[i] - u[i];
  }
  const T normb = norm(bt);
  T beta = norm(u);
  if (beta == T(0.0))
  {
    tr.termination = Termination::Tolerance;
    return res;
  }
  for (auto &ui : u)
  {
    ui = ui / beta;
  }
  std::vector<T> v = P.solve_t(op.mtv(u));
  T alpha = norm(v);
  if (alpha == T(0.0))
  {
    tr.termination = Termination::Tolerance;
    return res;
  }
  for (auto &vi : v)
  {
    vi = vi / alpha;
  }
  std::vector<T> w = v;
  std::vector<T> z(n, T(0.0));
  T phibar = beta;
  T rhobar = alpha;
  T anorm(0.0);
  const T r0 = beta;

  tr.termination = Termination::MaxIters;
  for (int it = 1; it <= cfg.max_iters; ++it)
  {
    tr.iterations = it;
    std::vector<T> av = op.mv(P.solve(v));
    for (std::size_t i = 0; i < av.size(); ++i)
    {
      u[i] = av[i] - alpha * u[i];
    }
    beta = norm(u);
    if (beta > T(0.0))
    {
      for (auto &ui : u)
      {
        ui = ui / beta;
      }
    }
    anorm = sqrt(anorm * anorm + alpha * alpha + beta * beta);
    std::vector<T> atu = P.solve_t(op.mtv(u));
    for (std::size_t j = 0; j < n; ++j)
    {
      v[j] = atu[j] - beta * v[j];
    }
    alpha = norm(v);
    if (alpha > T(0.0))
    {
      for (auto &vi : v)
      {
        vi = vi / alpha;
      }
    }
    const T rho = sqrt(rhobar * rhobar + beta * beta);
    const T c = rhobar / rho;
    const T s = beta / rho;
    const T theta = s * alpha;
    rhobar = -(c * alpha);
    const T phi = c * phibar;
    phibar = s * phibar;
    const T t1 = phi / rho;
    const T t2 = theta / rho;
    for (std::size_t j = 0; j < n; ++j)
    {
      z[j] += t1 * w[j];
      w[j] = v[j] - t2 * w[j];
    }
    if (!finite(phibar) || !all_finite(z))
    {
      ++tr.overflow_events;
      tr.termination = Termination::Breakdown;
      break;
    }
    const T normr = phibar;
    const T normar = phibar * alpha * abs(c);
    tr.residual_history.push_back(to_double(T(normr / r0)));
    if (normr <= tol * normb || normar <= tol * anorm * normr)
    {
      tr.termination = Termination::Tolerance;
      break;
    }
    if (beta == T(0.0) || alpha == T(0.0))
    {
      tr.termination = Termination::Breakdown;
      break;
    }
  }
  const std::vector<T> dx = P.solve(z);
  std::vector<T> x = xt;
  for (std::size_t j = 0; j < n; ++j)
  {
    x[j] += dx[j];
  }
  res.x = from_t(x);
  return res;
}

template <class T>
FgmresResult fgmres_impl(const DenseMatrix &A, const PreconditionerBundle &bundle,
                         std::span<const Real> rhs, const KrylovConfig &cfg)
{
  using std::abs;
  using std::sqrt;
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  const std::size_t N = m + n;
  if (rhs.size() != N)
  {
    throw Error(ErrorCode::DimensionMismatch, "FGMRES right-hand side has wrong length");
  }
  const VecFn aug = make_augmented(A, cfg.u_a, cfg.alpha);
  const VecFn left = make_split(bundle, Side::Left, cfg.u_l);
  const VecFn right = make_split(bundle, Side::Right, cfg.u_r);
  const T tol = constant<T>(cfg.tol);

  FgmresResult res;
  res.delta_r.assign(m, Real(0.0));
  res.delta_x.assign(n, Real(0.0));
  SolveTrace &tr = res.trace;
  tr.residual_history.push_back(1.0);

  const std::vector<T> s = to_t<T>(rhs);
  const T beta = norm(s);
  if (beta == T(0.0))
  {
    tr.termination = Termination::Tolerance;
    return res;
  }
  const std::size_t kmax = static_cast<std::size_t>(cfg.max_iters);
  std::vector<std::vector<T>> V;
  std::vector<std::vector<T>> Z;
  std::vector<std::vector<T>> H;  // H[j] is column j, length j + 2
  std::vector<T> cs;
  std::vector<T> sn;
  std::vector<T> g(kmax + 1, T(0.0));
  g[0] = beta;
  V.push_back(s);
  for (auto &x : V[0])
  {
    x = x / beta;
  }

  tr.termination = Termination::MaxIters;
  std::size_t k = 0;
  for (std::size_t j = 0; j < kmax; ++j)
  {
    std::vector<T> zj = to_t<T>(right(from_t(V[j])));
    std::vector<T> w = to_t<T>(left(aug(from_t(zj))));
    if (!all_finite(zj) || !all_finite(w))
    {
      ++tr.overflow_events;
      tr.termination = Termination::Breakdown;
      break;
    }
    std::vector<T> h(j + 2, T(0.0));
    const int passes = cfg.reorthogonalize ? 2 : 1;
    for (int pass = 0; pass < passes; ++pass)
    {
      for (std::size_t i = 0; i <= j; ++i)
      {
        const T hij = dot_t(w, V[i]);
        h[i] += hij;
        for (std::size_t p = 0; p < N; ++p)
        {
          w[p] -= hij * V[i][p];
        }
      }
    }
    const T hn = norm(w);
    h[j + 1] = hn;
    for (std::size_t i = 0; i < j; ++i)
    {
      const T t = cs[i] * h[i] + sn[i] * h[i + 1];
      h[i + 1] = cs[i] * h[i + 1] - sn[i] * h[i];
      h[i] = t;
    }
    const T rr = sqrt(h[j] * h[j] + hn * hn);
    if (rr == T(0.0) || !finite(rr))
    {
      ++tr.overflow_events;
      tr.termination = Termination::Breakdown;
      break;
    }
    cs.push_back(h[j] / rr);
    sn.push_back(hn / rr);
    h[j] = rr;
    h[j + 1] = T(0.0);
    g[j + 1] = -(sn[j] * g[j]);
    g[j] = cs[j] * g[j];
    H.push_back(std::move(h));
    Z.push_back(std::move(zj));
    k = j + 1;
    tr.iterations = static_cast<int>(k);
    const T rel = abs(g[j + 1]) / beta;
    tr.residual_history.push_back(to_double(rel));
    if (rel <= tol)
    {
      tr.termination = Termination::Tolerance;
      break;
    }
    if (hn == T(0.0))
    {
      tr.termination = Termination::Breakdown;
      break;
    }
    std::vector<T> next(N);
    for (std::size_t p = 0; p < N; ++p)
    {
      next[p] = w[p] / hn;
    }
    V.push_back(std::move(next));
  }
  tr.orthogonality_loss = orthogonality_loss(V, std::min(V.size(), k + 1));
  if (k == 0)
  {
    return res;
  }
  // Back substitution on the rotated Hessenberg matrix.
  std::vector<T> y(k);
  for (std::size_t i = k; i-- > 0;)
  {
    T t = g[i];
    for (std::size_t j = i + 1; j < k; ++j)
    {
      t -= H[j][i] * y[j];
    }
    y[i] = t / H[i][i];
  }
  std::vector<T> d(N, T(0.0));
  for (std::size_t j = 0; j < k; ++j)
  {
    for (std::size_t p = 0; p < N; ++p)
    {
      d[p] += y[j] * Z[j][p];
    }
  }
  for (std::size_t i = 0; i < m; ++i)
  {
    res.delta_r[i] = store(d[i]);
  }
  for (std::size_t j = 0; j < n; ++j)
  {
    res.delta_x[j] = store(d[m + j]);
  }
  return res;
}

}  // namespace

void KrylovConfig::validate() const
{
  if (!(tol > 0.0))
  {
    throw Error(ErrorCode::InvalidArgument, "Krylov tolerance must be positive");
  }
  if (max_iters < 1)
  {
    throw Error(ErrorCode::InvalidArgument, "Krylov iteration limit must be at least 1");
  }
  if (!(alpha > 0.0))
  {
    throw Error(ErrorCode::InvalidArgument, "augmented scaling must be positive");
  }
}

std::string_view to_string(Termination t)
{
  switch (t)
  {
    case Termination::Tolerance:
      return "tolerance";
    case Termination::MaxIters:
      return "max_iters";
    case Termination::Breakdown:
      break;
  }
  return "breakdown";
}

LsqrResult lsqr_right_precond(const DenseMatrix &A, std::span<const Real> b,
                              const PreconditionerBundle &bundle, std::span<const Real> x0,
                              const KrylovConfig &cfg)
{
  cfg.validate();
  if (b.size() != A.rows() || x0.size() != A.cols() || bundle.n() != A.cols())
  {
    throw Error(ErrorCode::DimensionMismatch, "LSQR operands do not conform");
  }
  return with_format(cfg.u, [&]<class T>() { return lsqr_impl<T>(A, b, bundle, x0, cfg); });
}

Vector apply_augmented(const DenseMatrix &A, std::span<const Real> v, Format fmt, double alpha)
{
  return make_augmented(A, fmt, alpha)(v);
}

Vector apply_split_precond(const PreconditionerBundle &bundle, Side side,
                           std::span<const Real> v, Format fmt)
{
  return make_split(bundle, side, fmt)(v);
}

FgmresResult fgmres_augmented(const DenseMatrix &A, const PreconditionerBundle &bundle,
                              std::span<const Real> rhs, const KrylovConfig &cfg)
{
  cfg.validate();
  return with_format(cfg.u, [&]<class T>() { return fgmres_impl<T>(A, bundle, rhs, cfg); });
}

}  // namespace sketchir

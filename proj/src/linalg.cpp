// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/linalg.hpp"

#include <algorithm>
#include <string>

namespace sketchir
{

namespace
{

template <class T>
std::vector<T> load_all(std::span<const Real> v)
{
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out[i] = load<T>(v[i]);
  }
  return out;
}

template <class T>
Vector store_all(const std::vector<T> &v)
{
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out[i] = store(v[i]);
  }
  return out;
}

void check_same_size(std::size_t a, std::size_t b, const char *what)
{
  if (a != b)
  {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": " + std::to_string(a) +
                                                  " vs " + std::to_string(b));
  }
}

template <class T>
T sign_of(const T &x)
{
  return x < T(0.0) ? T(-1.0) : T(1.0);
}

// Column-major working copy in arithmetic type T.
template <class T>
struct Work
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> a;

  Work(const DenseMatrix &M) : rows(M.rows()), cols(M.cols()), a(load_all<T>(M.data())) {}
  Work(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, T(0.0)) {}

  T &operator()(std::size_t i, std::size_t j) { return a[i + j * rows]; }
  const T &operator()(std::size_t i, std::size_t j) const { return a[i + j * rows]; }
  T *col(std::size_t j) { return a.data() + j * rows; }
  const T *col(std::size_t j) const { return a.data() + j * rows; }

  DenseMatrix to_matrix(Format fmt) const
  {
    std::vector<Real> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
      d[i] = store(a[i]);
    }
    return DenseMatrix::adopt(rows, cols, std::move(d), fmt);
  }
};

// Householder QR of W in place. Returns tau; R_kk = beta_k stored on the
// diagonal, v_k below it.
template <class T>
std::vector<T> householder_in_place(Work<T> &W)
{
  using std::sqrt;
  const std::size_t s = W.rows;
  const std::size_t n = W.cols;
  std::vector<T> tau(n, T(0.0));
  for (std::size_t k = 0; k < n; ++k)
  {
    T *x = W.col(k);
    T sumsq(0.0);
    for (std::size_t i = k; i < s; ++i)
    {
      sumsq += x[i] * x[i];
    }
    const T normx = sqrt(sumsq);
    if (normx == T(0.0) || !finite(normx))
    {
      throw Error(ErrorCode::ZeroColumn,
                  "Householder pivot " + std::to_string(k) + " is zero or not finite");
    }
    const T x0 = x[k];
    const T beta = -(sign_of(x0) * normx);
    const T denom = x0 - beta;  // |x0| + normx, no cancellation
    tau[k] = (beta - x0) / beta;
    for (std::size_t i = k + 1; i < s; ++i)
    {
      x[i] = x[i] / denom;
    }
    x[k] = beta;
    for (std::size_t j = k + 1; j < n; ++j)
    {
      T *y = W.col(j);
      T w = y[k];
      for (std::size_t i = k + 1; i < s; ++i)
      {
        w += x[i] * y[i];
      }
      const T tw = tau[k] * w;
      y[k] = y[k] - tw;
      for (std::size_t i = k + 1; i < s; ++i)
      {
        y[i] = y[i] - tw * x[i];
      }
    }
  }
  return tau;
}

// v <- H_k v for the reflector stored in column k of W.
template <class T>
void apply_reflector(const Work<T> &W, const std::vector<T> &tau, std::size_t k, std::vector<T> &v)
{
  const T *x = W.col(k);
  T w = v[k];
  for (std::size_t i = k + 1; i < W.rows; ++i)
  {
    w += x[i] * v[i];
  }
  const T tw = tau[k] * w;
  v[k] = v[k] - tw;
  for (std::size_t i = k + 1; i < W.rows; ++i)
  {
    v[i] = v[i] - tw * x[i];
  }
}

template <class T>
Work<T> reflector_work(const QRFactors &qr)
{
  Work<T> W(qr.reflectors);
  return W;
}

template <class T>
std::vector<Real> singular_values_jacobi(Work<T> U)
{
  using std::sqrt;
  const std::size_t n = U.cols;
  const std::size_t m = U.rows;
  const T tol(1e-30);
  for (int sweep = 0; sweep < 80; ++sweep)
  {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
    {
      for (std::size_t q = p + 1; q < n; ++q)
      {
        T *ap = U.col(p);
        T *aq = U.col(q);
        T alpha(0.0), beta(0.0), gam(0.0);
        for (std::size_t i = 0; i < m; ++i)
        {
          alpha += ap[i] * ap[i];
          beta += aq[i] * aq[i];
          gam += ap[i] * aq[i];
        }
        if (gam == T(0.0) || abs(gam) <= tol * sqrt(alpha * beta))
        {
          continue;
        }
        rotated = true;
        const T zeta = (beta - alpha) / (T(2.0) * gam);
        const T t = sign_of(zeta) / (abs(zeta) + sqrt(T(1.0) + zeta * zeta));
        const T c = T(1.0) / sqrt(T(1.0) + t * t);
        const T sn = c * t;
        for (std::size_t i = 0; i < m; ++i)
        {
          const T xp = ap[i];
          const T xq = aq[i];
          ap[i] = c * xp - sn * xq;
          aq[i] = sn * xp + c * xq;
        }
      }
    }
    if (!rotated)
    {
      break;
    }
  }
  std::vector<Real> sv(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    T s(0.0);
    const T *a = U.col(j);
    for (std::size_t i = 0; i < m; ++i)
    {
      s += a[i] * a[i];
    }
    sv[j] = store(T(sqrt(s)));
  }
  std::sort(sv.begin(), sv.end(), [](const Real &a, const Real &b) { return a > b; });
  return sv;
}

dd_real pythag(const dd_real &a, const dd_real &b)
{
  const dd_real aa = abs(a);
  const dd_real ab = abs(b);
  if (aa > ab)
  {
    const dd_real r = ab / aa;
    return aa * sqrt(dd_real(1.0) + r * r);
  }
  if (ab.hi == 0.0)
  {
    return dd_real(0.0);
  }
  const dd_real r = aa / ab;
  return ab * sqrt(dd_real(1.0) + r * r);
}

}  // namespace

Real dot(std::span<const Real> x, std::span<const Real> y, Format fmt)
{
  check_same_size(x.size(), y.size(), "dot");
  return with_format(fmt, [&]<class T>() {
    T s(0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
    {
      s += load<T>(x[i]) * load<T>(y[i]);
    }
    return store(s);
  });
}

Real nrm2(std::span<const Real> x, Format fmt)
{
  return with_format(fmt, [&]<class T>() {
    using std::sqrt;
    T s(0.0);
    for (const auto &xi : x)
    {
      const T v = load<T>(xi);
      s += v * v;
    }
    return store(T(sqrt(s)));
  });
}

void axpy(const Real &alpha, std::span<const Real> x, std::span<Real> y, Format fmt)
{
  check_same_size(x.size(), y.size(), "axpy");
  with_format(fmt, [&]<class T>() {
    const T a = load<T>(alpha);
    for (std::size_t i = 0; i < x.size(); ++i)
    {
      y[i] = store(T(load<T>(y[i]) + a * load<T>(x[i])));
    }
  });
}

void scal(const Real &alpha, std::span<Real> x, Format fmt)
{
  with_format(fmt, [&]<class T>() {
    const T a = load<T>(alpha);
    for (auto &xi : x)
    {
      xi = store(T(a * load<T>(xi)));
    }
  });
}

Vector add(std::span<const Real> x, std::span<const Real> y, Format fmt)
{
  check_same_size(x.size(), y.size(), "add");
  return with_format(fmt, [&]<class T>() {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
    {
      out[i] = store(T(load<T>(x[i]) + load<T>(y[i])));
    }
    return out;
  });
}

Vector sub(std::span<const Real> x, std::span<const Real> y, Format fmt)
{
  check_same_size(x.size(), y.size(), "sub");
  return with_format(fmt, [&]<class T>() {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
    {
      out[i] = store(T(load<T>(x[i]) - load<T>(y[i])));
    }
    return out;
  });
}

Vector matvec(const DenseMatrix &A, std::span<const Real> x, Format fmt, bool transpose)
{
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  check_same_size(x.size(), transpose ? m : n, "matvec");
  return with_format(fmt, [&]<class T>() {
    const std::vector<T> xv = load_all<T>(x);
    if (transpose)
    {
      std::vector<T> y(n, T(0.0));
      for (std::size_t j = 0; j < n; ++j)
      {
        const auto c = A.col(j);
        T s(0.0);
        for (std::size_t i = 0; i < m; ++i)
        {
          s += load<T>(c[i]) * xv[i];
        }
        y[j] = s;
      }
      return store_all(y);
    }
    // Column sweep; each y_i is still accumulated in index order.
    std::vector<T> y(m, T(0.0));
    for (std::size_t j = 0; j < n; ++j)
    {
      const auto c = A.col(j);
      const T xj = xv[j];
      for (std::size_t i = 0; i < m; ++i)
      {
        y[i] += load<T>(c[i]) * xj;
      }
    }
    return store_all(y);
  });
}

DenseMatrix matmul(const DenseMatrix &A, const DenseMatrix &B, Format fmt)
{
  check_same_size(A.cols(), B.rows(), "matmul inner dimension");
  const std::size_t m = A.rows();
  const std::size_t k = A.cols();
  const std::size_t n = B.cols();
  return with_format(fmt, [&]<class T>() {
    const Work<T> a(A);
    Work<T> c(m, n);
    for (std::size_t j = 0; j < n; ++j)
    {
      const std::vector<T> b = load_all<T>(B.col(j));
      T *cj = c.col(j);
      for (std::size_t p = 0; p < k; ++p)
      {
        const T bp = b[p];
        const T *ap = a.col(p);
        for (std::size_t i = 0; i < m; ++i)
        {
          cj[i] += ap[i] * bp;
        }
      }
    }
    return c.to_matrix(fmt);
  });
}

QRFactors householder_qr(const DenseMatrix &Y, Format fmt)
{
  if (Y.rows() < Y.cols())
  {
    throw Error(ErrorCode::DimensionMismatch, "householder_qr needs rows >= cols");
  }
  const std::size_t s = Y.rows();
  const std::size_t n = Y.cols();
  return with_format(fmt, [&]<class T>() {
    Work<T> W(Y);
    const std::vector<T> tau = householder_in_place(W);
    QRFactors qr;
    qr.fmt = fmt;
    qr.tau = store_all(tau);
    qr.signs.resize(n);
    Work<T> R(n, n);
    for (std::size_t k = 0; k < n; ++k)
    {
      qr.signs[k] = W(k, k) < T(0.0) ? -1 : 1;
      for (std::size_t j = k; j < n; ++j)
      {
        R(k, j) = qr.signs[k] < 0 ? -W(k, j) : W(k, j);
      }
    }
    qr.R = R.to_matrix(fmt);
    Work<T> V(s, n);
    for (std::size_t k = 0; k < n; ++k)
    {
      V(k, k) = T(1.0);
      for (std::size_t i = k + 1; i < s; ++i)
      {
        V(i, k) = W(i, k);
      }
    }
    qr.reflectors = V.to_matrix(fmt);
    return qr;
  });
}

Vector apply_qt(const QRFactors &qr, std::span<const Real> v, Format fmt)
{
  const std::size_t s = qr.reflectors.rows();
  const std::size_t n = qr.reflectors.cols();
  check_same_size(v.size(), s, "apply_qt");
  return with_format(fmt, [&]<class T>() {
    const Work<T> W(qr.reflectors);
    const std::vector<T> tau = load_all<T>(qr.tau);
    std::vector<T> x = load_all<T>(v);
    for (std::size_t k = 0; k < n; ++k)
    {
      apply_reflector(W, tau, k, x);
    }
    Vector out(n);
    for (std::size_t k = 0; k < n; ++k)
    {
      out[k] = store(qr.signs[k] < 0 ? T(-x[k]) : x[k]);
    }
    return out;
  });
}

Vector project_out(const QRFactors &qr, std::span<const Real> v, Format fmt)
{
  const std::size_t s = qr.reflectors.rows();
  const std::size_t n = qr.reflectors.cols();
  check_same_size(v.size(), s, "project_out");
  return with_format(fmt, [&]<class T>() {
    const Work<T> W(qr.reflectors);
    const std::vector<T> tau = load_all<T>(qr.tau);
    std::vector<T> x = load_all<T>(v);
    for (std::size_t k = 0; k < n; ++k)
    {
      apply_reflector(W, tau, k, x);
    }
    std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), T(0.0));
    for (std::size_t k = n; k-- > 0;)
    {
      apply_reflector(W, tau, k, x);
    }
    return store_all(x);
  });
}

DenseMatrix explicit_q(const QRFactors &qr, Format fmt)
{
  const std::size_t s = qr.reflectors.rows();
  const std::size_t n = qr.reflectors.cols();
  return with_format(fmt, [&]<class T>() {
    const Work<T> W(qr.reflectors);
    const std::vector<T> tau = load_all<T>(qr.tau);
    Work<T> Q(s, n);
    for (std::size_t j = 0; j < n; ++j)
    {
      std::vector<T> e(s, T(0.0));
      e[j] = T(1.0);
      for (std::size_t k = n; k-- > 0;)
      {
        apply_reflector(W, tau, k, e);
      }
      for (std::size_t i = 0; i < s; ++i)
      {
        Q(i, j) = qr.signs[j] < 0 ? T(-e[i]) : e[i];
      }
    }
    return Q.to_matrix(fmt);
  });
}

Vector tri_solve(const DenseMatrix &R, std::span<const Real> v, bool transpose, Format fmt)
{
  const std::size_t n = R.rows();
  check_same_size(R.cols(), n, "tri_solve square");
  check_same_size(v.size(), n, "tri_solve rhs");
  for (std::size_t i = 0; i < n; ++i)
  {
    if (R(i, i).hi == 0.0)
    {
      throw Error(ErrorCode::SingularR, "zero diagonal entry at " + std::to_string(i));
    }
  }
  return with_format(fmt, [&]<class T>() {
    std::vector<T> x = load_all<T>(v);
    if (transpose)
    {
      // R^T is lower triangular; column i of R is row i of R^T.
      for (std::size_t i = 0; i < n; ++i)
      {
        const auto c = R.col(i);
        T s = x[i];
        for (std::size_t j = 0; j < i; ++j)
        {
          s -= load<T>(c[j]) * x[j];
        }
        x[i] = s / load<T>(c[i]);
      }
      return store_all(x);
    }
    for (std::size_t j = n; j-- > 0;)
    {
      const auto c = R.col(j);
      x[j] = x[j] / load<T>(c[j]);
      const T xj = x[j];
      for (std::size_t i = 0; i < j; ++i)
      {
        x[i] -= load<T>(c[i]) * xj;
      }
    }
    return store_all(x);
  });
}

DenseMatrix right_tri_solve(const DenseMatrix &A, const DenseMatrix &R, Format fmt)
{
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  check_same_size(R.rows(), n, "right_tri_solve");
  check_same_size(R.cols(), n, "right_tri_solve");
  for (std::size_t i = 0; i < n; ++i)
  {
    if (R(i, i).hi == 0.0)
    {
      throw Error(ErrorCode::SingularR, "zero diagonal entry at " + std::to_string(i));
    }
  }
  return with_format(fmt, [&]<class T>() {
    Work<T> B(A);
    const Work<T> r(R);
    for (std::size_t j = 0; j < n; ++j)
    {
      T *bj = B.col(j);
      for (std::size_t k = 0; k < j; ++k)
      {
        const T rkj = r(k, j);
        const T *bk = B.col(k);
        for (std::size_t i = 0; i < m; ++i)
        {
          bj[i] -= bk[i] * rkj;
        }
      }
      const T d = r(j, j);
      for (std::size_t i = 0; i < m; ++i)
      {
        bj[i] = bj[i] / d;
      }
    }
    return B.to_matrix(fmt);
  });
}

SingularValues svd_values(const DenseMatrix &M)
{
  for (const auto &x : M.data())
  {
    if (!isfinite(x))
    {
      throw Error(ErrorCode::InvalidArgument, "svd_values: non-finite entry");
    }
  }
  const DenseMatrix tall = M.rows() >= M.cols() ? M : M.transpose();
  if (tall.cols() == 0)
  {
    return {};
  }
  // Reduce to the n x n triangular factor first; singular values are kept.
  Work<dd_real> W(tall);
  bool zero = false;
  try
  {
    householder_in_place(W);
  }
  catch (const Error &)
  {
    zero = true;
  }
  Work<dd_real> U(tall.cols(), tall.cols());
  if (zero)
  {
    // Rank-deficient: fall back to Jacobi on the full matrix.
    U = Work<dd_real>(tall);
  }
  else
  {
    for (std::size_t j = 0; j < tall.cols(); ++j)
    {
      for (std::size_t i = 0; i <= j; ++i)
      {
        U(i, j) = W(i, j);
      }
    }
  }
  return {singular_values_jacobi(std::move(U))};
}

SingularValues symmetric_singular_values(const DenseMatrix &M)
{
  const std::size_t N = M.rows();
  check_same_size(M.cols(), N, "symmetric_singular_values");
  if (N == 0)
  {
    return {};
  }
  Work<dd_real> A(M);
  std::vector<dd_real> d(N), e(N, dd_real(0.0));
  // Householder tridiagonalization acting on the lower triangle.
  for (std::size_t k = 0; k + 2 < N; ++k)
  {
    dd_real sumsq(0.0);
    for (std::size_t i = k + 1; i < N; ++i)
    {
      sumsq += A(i, k) * A(i, k);
    }
    const dd_real normx = sqrt(sumsq);
    d[k] = A(k, k);
    if (normx.hi == 0.0)
    {
      e[k] = dd_real(0.0);
      continue;
    }
    const dd_real x0 = A(k + 1, k);
    const dd_real beta = -(sign_of(x0) * normx);
    const dd_real denom = x0 - beta;
    const dd_real tau = (beta - x0) / beta;
    std::vector<dd_real> v(N, dd_real(0.0));
    v[k + 1] = dd_real(1.0);
    for (std::size_t i = k + 2; i < N; ++i)
    {
      v[i] = A(i, k) / denom;
    }
    e[k] = beta;
    // p = tau * A22 v using the lower triangle only.
    std::vector<dd_real> p(N, dd_real(0.0));
    for (std::size_t j = k + 1; j < N; ++j)
    {
      const dd_real vj = v[j];
      dd_real acc = A(j, j) * vj;
      for (std::size_t i = j + 1; i < N; ++i)
      {
        acc += A(i, j) * v[i];
        p[i] += A(i, j) * vj;
      }
      p[j] += acc;
    }
    dd_real pv(0.0);
    for (std::size_t i = k + 1; i < N; ++i)
    {
      p[i] = tau * p[i];
      pv += p[i] * v[i];
    }
    const dd_real half_tau_pv = dd_real(0.5) * tau * pv;
    for (std::size_t i = k + 1; i < N; ++i)
    {
      p[i] -= half_tau_pv * v[i];
    }
    for (std::size_t j = k + 1; j < N; ++j)
    {
      const dd_real vj = v[j];
      const dd_real wj = p[j];
      for (std::size_t i = j; i < N; ++i)
      {
        A(i, j) -= v[i] * wj + p[i] * vj;
      }
    }
  }
  if (N >= 2)
  {
    d[N - 2] = A(N - 2, N - 2);
    e[N - 2] = A(N - 1, N - 2);
  }
  d[N - 1] = A(N - 1, N - 1);
  e[N - 1] = dd_real(0.0);

  // Implicit QL with Wilkinson-type shifts (tqli).
  const dd_real eps(0x1p-104);
  for (std::size_t l = 0; l < N; ++l)
  {
    int iter = 0;
    std::size_t m = l;
    do
    {
      for (m = l; m + 1 < N; ++m)
      {
        const dd_real dd_ = abs(d[m]) + abs(d[m + 1]);
        if (abs(e[m]) <= eps * dd_)
        {
          break;
        }
      }
      if (m != l)
      {
        if (++iter > 200)
        {
          break;
        }
        dd_real g = (d[l + 1] - d[l]) / (dd_real(2.0) * e[l]);
        dd_real r = pythag(g, dd_real(1.0));
        g = d[m] - d[l] + e[l] / (g + (g.hi < 0.0 ? -abs(r) : abs(r)));
        dd_real s(1.0), c(1.0), p(0.0);
        bool early = false;
        for (std::size_t i = m; i-- > l;)
        {
          const dd_real f = s * e[i];
          const dd_real b = c * e[i];
          r = pythag(f, g);
          e[i + 1] = r;
          if (r.hi == 0.0)
          {
            d[i + 1] -= p;
            e[m] = dd_real(0.0);
            early = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + dd_real(2.0) * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (early)
        {
          continue;
        }
        d[l] -= p;
        e[l] = g;
        e[m] = dd_real(0.0);
      }
    } while (m != l);
  }
  SingularValues out;
  out.values.resize(N);
  for (std::size_t i = 0; i < N; ++i)
  {
    out.values[i] = abs(d[i]);
  }
  std::sort(out.values.begin(), out.values.end(),
            [](const Real &a, const Real &b) { return a > b; });
  return out;
}

double frobenius(const DenseMatrix &M)
{
  dd_real s(0.0);
  for (const auto &x : M.data())
  {
    s += x * x;
  }
  return to_double(sqrt(s));
}

DenseMatrix difference(const DenseMatrix &A, const DenseMatrix &B)
{
  check_same_size(A.rows(), B.rows(), "difference rows");
  check_same_size(A.cols(), B.cols(), "difference cols");
  std::vector<Real> d(A.data().size());
  for (std::size_t i = 0; i < d.size(); ++i)
  {
    d[i] = A.data()[i] - B.data()[i];
  }
  return DenseMatrix::adopt(A.rows(), A.cols(), std::move(d), Format::Quad);
}

}  // namespace sketchir

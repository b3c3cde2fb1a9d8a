// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <set>

#include "sketchir/random.hpp"
#include "support.hpp"

using namespace sketchir;
using namespace sketchir::test;

namespace
{

LMatrix dense_omega(const SketchOperator &omega) { return to_eigen(omega.to_dense()); }

bool bit_identical(const DenseMatrix &a, const DenseMatrix &b)
{
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

}  // namespace

TEST(Gaussian, DeterministicForFixedSeed)
{
  const SketchOperator a = make_gaussian(400, 1000, 1, GaussianConvention::Paper, 100);
  const SketchOperator b = make_gaussian(400, 1000, 1, GaussianConvention::Paper, 100);
  EXPECT_EQ(a.dense, b.dense);
  EXPECT_EQ(a.rng(), kRngName);
  const SketchOperator c = make_gaussian(400, 1000, 2, GaussianConvention::Paper, 100);
  EXPECT_NE(a.dense, c.dense);
}

TEST(Gaussian, PaperShapeAndScale)
{
  const SketchOperator omega = make_gaussian(400, 1000, 3, GaussianConvention::Paper, 100);
  EXPECT_EQ(omega.s, 400u);
  EXPECT_EQ(omega.m, 1000u);
  EXPECT_EQ(omega.to_dense().rows(), 400u);
  EXPECT_EQ(omega.to_dense().cols(), 1000u);
  EXPECT_DOUBLE_EQ(omega.scale, 1.0 / std::sqrt(400.0));
  // s = 4n makes the two conventions coincide.
  const SketchOperator theory = make_gaussian(400, 1000, 3, GaussianConvention::Theory);
  EXPECT_DOUBLE_EQ(theory.scale, omega.scale);
  const SketchOperator wide = make_gaussian(300, 1000, 3, GaussianConvention::Paper, 100);
  EXPECT_DOUBLE_EQ(wide.scale, 1.0 / std::sqrt(400.0));
}

TEST(Gaussian, ColumnNormsConcentrate)
{
  const SketchOperator omega = make_gaussian(400, 1000, 4, GaussianConvention::Theory);
  const LMatrix W = dense_omega(omega);
  long double mean = 0;
  for (Eigen::Index j = 0; j < W.cols(); ++j)
  {
    mean += W.col(j).squaredNorm();
  }
  mean /= static_cast<long double>(W.cols());
  EXPECT_GE(mean, 0.9L);
  EXPECT_LE(mean, 1.1L);
}

TEST(SparseSign, ColumnStructure)
{
  const std::size_t s = 400;
  const std::size_t m = 1000;
  const int zeta = 8;
  const SketchOperator omega = make_sparse_sign(s, m, zeta, 5);
  const LMatrix W = dense_omega(omega);
  const long double mag = std::sqrt(static_cast<long double>(m) / zeta);
  std::size_t positive = 0;
  for (std::size_t j = 0; j < m; ++j)
  {
    int nnz = 0;
    for (std::size_t i = 0; i < s; ++i)
    {
      const long double w = W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w != 0)
      {
        ++nnz;
        EXPECT_NEAR(std::abs(w), mag, 1e-12L);
        positive += w > 0;
      }
    }
    EXPECT_EQ(nnz, zeta) << j;
    EXPECT_NEAR(W.col(static_cast<Eigen::Index>(j)).norm(), std::sqrt(static_cast<long double>(m)), 1e-9L);
  }
  const double frac = static_cast<double>(positive) / static_cast<double>(m * zeta);
  EXPECT_GT(frac, 0.45);
  EXPECT_LT(frac, 0.55);
  EXPECT_EQ(make_sparse_sign(s, m, zeta, 5).row_index, omega.row_index);
  EXPECT_EQ(make_sparse_sign(s, m, zeta, 5).values, omega.values);
}

TEST(SparseSign, ZetaRange)
{
  for (int zeta : {1, 0, 401})
  {
    try
    {
      make_sparse_sign(400, 1000, zeta, 1);
      FAIL() << zeta;
    }
    catch (const Error &e)
    {
      EXPECT_EQ(e.code(), ErrorCode::ZetaOutOfRange);
    }
  }
  EXPECT_NO_THROW(make_sparse_sign(400, 1000, 2, 1));
  EXPECT_NO_THROW(make_sparse_sign(400, 1000, 400, 1));
}

TEST(SparseSign, SampledDistortionOfRandsvdRange)
{
  const DenseMatrix A = gen_randsvd(1000, 100, 1e2, 6);
  const SketchOperator omega = make_sparse_sign(400, 1000, 8, 6);
  const double sampled = sampled_distortion(omega, A, 1000, 7);
  EXPECT_LT(sampled, 0.9);
  EXPECT_LE(sampled, distortion(omega, A) * (1 + 1e-12));
}

TEST(ApplySketch, IdentityLeavesDoubleInputUnchanged)
{
  const DenseMatrix A = random_matrix(30, 4, 8);
  EXPECT_TRUE(bit_identical(apply_sketch(make_identity(30), A, Format::Double), A));
  const DenseMatrix Ah = apply_sketch(make_identity(30), A, Format::Half);
  EXPECT_TRUE(bit_identical(Ah, round_matrix(A, Format::Half)));
}

TEST(ApplySketch, DeterministicAtEveryFormat)
{
  const DenseMatrix A = random_matrix(200, 10, 9);
  for (Format f : {Format::Half, Format::Single, Format::Double, Format::Quad})
  {
    const SketchOperator g1 = make_gaussian(40, 200, 10, GaussianConvention::Paper, 10);
    const SketchOperator g2 = make_gaussian(40, 200, 10, GaussianConvention::Paper, 10);
    EXPECT_TRUE(bit_identical(apply_sketch(g1, A, f), apply_sketch(g2, A, f))) << to_string(f);
    const SketchOperator s1 = make_sparse_sign(40, 200, 8, 10);
    const SketchOperator s2 = make_sparse_sign(40, 200, 8, 10);
    EXPECT_TRUE(bit_identical(apply_sketch(s1, A, f), apply_sketch(s2, A, f))) << to_string(f);
  }
}

TEST(ApplySketch, SparseMatchesDenseProduct)
{
  const DenseMatrix A = random_matrix(300, 7, 11);
  const SketchOperator omega = make_sparse_sign(50, 300, 6, 12);
  const LMatrix ref = dense_omega(omega) * to_eigen(A);
  const DenseMatrix Y = apply_sketch(omega, A, Format::Double);
  EXPECT_LE((to_eigen(Y) - ref).norm() / ref.norm(), 1e-14L);
  const Vector b = random_vector(300, 13);
  const Vector yb = apply_sketch(omega, b, Format::Double);
  const LVector refb = dense_omega(omega) * to_eigen(b);
  EXPECT_LE((to_eigen(yb) - refb).norm() / refb.norm(), 1e-14L);
}

TEST(ApplySketch, GaussianConditionSandwich)
{
  // s = 20n keeps eps below 1 so that both sides of the sandwich are finite.
  const double kappa = 1e2;
  const DenseMatrix A = gen_randsvd(1000, 25, kappa, 14);
  const SketchOperator omega = make_gaussian(500, 1000, 14, GaussianConvention::Theory);
  const double eps = distortion(omega, A);
  ASSERT_LT(eps, 1.0);
  const double k = svd_values(apply_sketch(omega, A, Format::Double)).cond();
  EXPECT_GE(k, kappa * std::sqrt((1 - eps) / (1 + eps)));
  EXPECT_LE(k, kappa * std::sqrt((1 + eps) / (1 - eps)));
}

TEST(ApplySketch, HalfSketchErrorBound)
{
  const DenseMatrix A = gen_randsvd(1000, 100, 1e2, 15);
  const SketchOperator omega = make_gaussian(400, 1000, 15, GaussianConvention::Paper, 100);
  const LMatrix W = dense_omega(omega);
  const LMatrix ref = W * to_eigen(A);
  const DenseMatrix Y = apply_sketch(omega, A, Format::Half);
  const long double err = eigen_norm2(to_eigen(Y) - ref);
  const long double bound = (0x1p-11 + std::sqrt(1000.0) * gamma(1000, Format::Half)) *
                            eigen_norm2(to_eigen(A)) * eigen_norm2(W);
  EXPECT_LE(err, bound);
  // The cast alone already costs about u_s; the realised error is far below the bound.
  EXPECT_LE(err, 0.05L * bound);
}

TEST(ApplySketch, HalfOverflowIsReported)
{
  DenseMatrix A = random_matrix(100, 3, 16);
  for (std::size_t i = 0; i < 100; ++i)
  {
    A.set(i, 0, Real(60000.0));
  }
  const SketchOperator omega = make_gaussian(12, 100, 16, GaussianConvention::Theory);
  try
  {
    apply_sketch(omega, A, Format::Half);
    FAIL() << "expected SketchOverflow";
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), ErrorCode::SketchOverflow);
  }
  EXPECT_THROW(apply_sketch(omega, random_matrix(99, 3, 1), Format::Double), Error);
}

TEST(ColumnScaling, Examples)
{
  const DenseMatrix A = DenseMatrix::from_rows({{1, -0.5}, {0.25, 1}});
  const auto [sc, AS] = column_scaling(A, 1.0, Format::Double);
  EXPECT_EQ(sc.S[0].hi, 1.0);
  EXPECT_EQ(sc.S[1].hi, 1.0);

  const auto [sc2, AS2] = column_scaling(DenseMatrix::from_rows({{2, 0}, {0, 8}}), 1.0, Format::Double);
  EXPECT_EQ(sc2.S[0].hi, 0.5);
  EXPECT_EQ(sc2.S[1].hi, 0.125);
  EXPECT_EQ(AS2.at(0, 0), 1.0);
  EXPECT_EQ(AS2.at(1, 1), 1.0);
  EXPECT_EQ(AS2.at(0, 1), 0.0);
  EXPECT_EQ(AS2.at(1, 0), 0.0);
}

TEST(ColumnScaling, UnitColumnMaxima)
{
  const DenseMatrix A = gen_randsvd(1000, 100, 1e4, 17);
  const auto [sc, AS] = column_scaling(A, 1.0, Format::Double);
  for (std::size_t j = 0; j < A.cols(); ++j)
  {
    double mx = 0;
    for (std::size_t i = 0; i < A.rows(); ++i)
    {
      mx = std::max(mx, std::abs(AS.at(i, j)));
    }
    EXPECT_EQ(mx, 1.0) << j;
  }
}

TEST(ColumnScaling, DefaultThetaKeepsHalfInRange)
{
  DenseMatrix A = gen_randsvd(1000, 50, 1e3, 18);
  for (std::size_t i = 0; i < A.rows(); ++i)
  {
    A.set(i, 3, A(i, 3) * Real(1e8));
  }
  const double theta = default_theta(Format::Half, A.rows());
  const auto [sc, AS] = column_scaling(A, theta, Format::Half);
  for (const Real &x : AS.data())
  {
    ASSERT_TRUE(std::isfinite(x.hi));
    ASSERT_LE(std::abs(x.hi), precision(Format::Half).max_finite);
  }
  const SketchOperator omega = make_gaussian(200, 1000, 18, GaussianConvention::Paper, 50);
  EXPECT_NO_THROW(apply_sketch(omega, AS, Format::Half));
}

TEST(ColumnScaling, ZeroColumnRejected)
{
  DenseMatrix A = random_matrix(5, 2, 19);
  for (std::size_t i = 0; i < 5; ++i)
  {
    A.set(i, 1, Real(0.0));
  }
  try
  {
    column_scaling(A, 1.0, Format::Double);
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), ErrorCode::ZeroColumn);
  }
}

TEST(Embedding, SingularValueSandwich)
{
  std::mt19937_64 gen(20);
  for (int trial = 0; trial < 20; ++trial)
  {
    const std::size_t n = 5 + gen() % 16;
    const std::size_t m = 40 * n;
    const DenseMatrix A = random_matrix(m, n, 100 + trial);
    const SketchOperator omega = make_gaussian(4 * n, m, 200 + trial, GaussianConvention::Theory);
    // At s = 4n eps is typically above 1 and the lower side is then vacuous.
    const double eps = distortion(omega, A);
    const SingularValues sa = svd_values(A);
    const SingularValues sy = svd_values(apply_sketch(omega, A, Format::Double));
    const double slack = 1 + 1e-12;
    EXPECT_LE(std::sqrt(std::max(0.0, 1 - eps)) * sa.min(), sy.min() * slack) << trial;
    EXPECT_LE(sy.max(), std::sqrt(1 + eps) * sa.max() * slack) << trial;
    EXPECT_LE(sampled_distortion(omega, A, 1000, 300 + trial), eps * slack) << trial;
  }
}

TEST(Embedding, WideSketchSandwichIsTwoSided)
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    const DenseMatrix A = random_matrix(2000, 10, 400 + seed);
    const SketchOperator omega = make_gaussian(400, 2000, 500 + seed, GaussianConvention::Theory);
    const double eps = distortion(omega, A);
    ASSERT_LT(eps, 1.0);
    const SingularValues sa = svd_values(A);
    const SingularValues sy = svd_values(apply_sketch(omega, A, Format::Double));
    EXPECT_LE(std::sqrt(1 - eps) * sa.min(), sy.min() * (1 + 1e-12));
    EXPECT_LE(sy.max(), std::sqrt(1 + eps) * sa.max() * (1 + 1e-12));
  }
}

TEST(Embedding, DistortionIgnoresOperatorScale)
{
  const DenseMatrix A = random_matrix(400, 8, 600);
  const SketchOperator theory = make_gaussian(64, 400, 601, GaussianConvention::Theory);
  SketchOperator doubled = theory;
  doubled.scale *= 2;
  for (double &w : doubled.dense)
  {
    w *= 2;
  }
  EXPECT_NEAR(distortion(doubled, A), distortion(theory, A), 1e-14);
}

TEST(Embedding, PreconditionerQualityIdentities)
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    const std::size_t n = 10 + seed;
    const DenseMatrix A = gen_randsvd(300, n, std::pow(10.0, 1.0 + 0.4 * seed), seed);
    const SketchOperator omega = make_gaussian(4 * n, 300, seed, GaussianConvention::Theory);
    const QRFactors qr = householder_qr(apply_sketch(omega, A, Format::Double), Format::Double);
    const LMatrix AR = to_eigen(right_tri_solve(A, qr.R, Format::Quad));
    const DenseMatrix QA = explicit_q(householder_qr(A, Format::Quad), Format::Quad);
    const LMatrix OQ = dense_omega(omega) * to_eigen(QA);
    const LVector s_ar = eigen_singular_values(AR);
    const LVector s_oq = eigen_singular_values(OQ);
    const long double k_ar = s_ar(0) / s_ar(s_ar.size() - 1);
    const long double k_oq = s_oq(0) / s_oq(s_oq.size() - 1);
    EXPECT_LE(std::abs(k_ar - k_oq) / k_oq, 1e-8L) << seed;
    const long double pinv_oq = 1 / s_oq(s_oq.size() - 1);
    EXPECT_LE(std::abs(s_ar(0) - pinv_oq) / pinv_oq, 1e-8L) << seed;
  }
}

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/matrix.hpp"

#include <string>

namespace sketchir
{

Vector make_vector(std::initializer_list<double> values)
{
  Vector v;
  v.reserve(values.size());
  for (double x : values)
  {
    v.emplace_back(x);
  }
  return v;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Format fmt)
  : rows_(rows), cols_(cols), fmt_(fmt), data_(rows * cols)
{
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data, Format fmt)
  : rows_(rows), cols_(cols), fmt_(fmt), data_(std::move(data))
{
  if (data_.size() != rows * cols)
  {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                    std::to_string(rows * cols));
  }
  for (auto &x : data_)
  {
    x = round_scalar(x, fmt_);
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n, Format fmt)
{
  DenseMatrix I(n, n, fmt);
  for (std::size_t i = 0; i < n; ++i)
  {
    I.data_[i + i * n] = Real(1.0);
  }
  return I;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows,
                                   Format fmt)
{
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows.begin()->size();
  std::vector<Real> data(m * n);
  std::size_t i = 0;
  for (const auto &row : rows)
  {
    if (row.size() != n)
    {
      throw Error(ErrorCode::DimensionMismatch, "ragged row list");
    }
    std::size_t j = 0;
    for (double x : row)
    {
      data[i + j * m] = Real(x);
      ++j;
    }
    ++i;
  }
  return DenseMatrix(m, n, std::move(data), fmt);
}

DenseMatrix DenseMatrix::adopt(std::size_t rows, std::size_t cols, std::vector<Real> data,
                               Format fmt)
{
  DenseMatrix M;
  M.rows_ = rows;
  M.cols_ = cols;
  M.fmt_ = fmt;
  M.data_ = std::move(data);
  return M;
}

void DenseMatrix::set(std::size_t i, std::size_t j, const Real &v)
{
  data_[i + j * rows_] = round_scalar(v, fmt_);
}

DenseMatrix DenseMatrix::transpose() const
{
  std::vector<Real> t(data_.size());
  for (std::size_t j = 0; j < cols_; ++j)
  {
    for (std::size_t i = 0; i < rows_; ++i)
    {
      t[j + i * cols_] = data_[i + j * rows_];
    }
  }
  return adopt(cols_, rows_, std::move(t), fmt_);
}

DenseMatrix round_matrix(const DenseMatrix &m, Format fmt, FpFlags *flags, bool throw_on_overflow)
{
  std::vector<Real> out(m.data().size());
  FpFlags local;
  for (std::size_t j = 0; j < m.cols(); ++j)
  {
    for (std::size_t i = 0; i < m.rows(); ++i)
    {
      FpFlags f;
      out[i + j * m.rows()] = round_scalar(m(i, j), fmt, &f);
      if (f.overflow && throw_on_overflow)
      {
        throw Error(ErrorCode::Overflow, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                             ") overflows in " + std::string(to_string(fmt)));
      }
      local.merge(f);
    }
  }
  if (flags != nullptr)
  {
    flags->merge(local);
  }
  return DenseMatrix::adopt(m.rows(), m.cols(), std::move(out), fmt);
}

Vector round_vector(std::span<const Real> v, Format fmt, FpFlags *flags)
{
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out[i] = round_scalar(v[i], fmt, flags);
  }
  return out;
}

std::vector<double> to_doubles(std::span<const Real> v)
{
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out[i] = to_double(v[i]);
  }
  return out;
}

}  // namespace sketchir

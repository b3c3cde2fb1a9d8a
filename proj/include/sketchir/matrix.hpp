// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sketchir/fpcore.hpp"

namespace sketchir
{

using Vector = std::vector<Real>;

Vector make_vector(std::initializer_list<double> values);

// Column-major dense matrix whose entries are all representable in format().
class DenseMatrix
{
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, Format fmt = Format::Double);
  // Rounds every entry of data (column-major) to fmt.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data, Format fmt);

  static DenseMatrix identity(std::size_t n, Format fmt = Format::Double);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows,
                               Format fmt = Format::Double);
  // Takes ownership of data that the caller guarantees is already
  // representable in fmt (kernel outputs). No rounding is performed.
  static DenseMatrix adopt(std::size_t rows, std::size_t cols, std::vector<Real> data,
                           Format fmt);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Format format() const { return fmt_; }
  bool empty() const { return data_.empty(); }

  const Real &operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }
  void set(std::size_t i, std::size_t j, const Real &v);

  std::span<const Real> col(std::size_t j) const
  {
    return {data_.data() + j * rows_, rows_};
  }
  std::span<const Real> data() const { return data_; }

  DenseMatrix transpose() const;
  // Entry (i, j) as a double (high word).
  double at(std::size_t i, std::size_t j) const { return (*this)(i, j).hi; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Format fmt_ = Format::Double;
  std::vector<Real> data_;
};

// Entrywise rounding. Throws Error(Overflow) naming the first entry that
// overflows when throw_on_overflow is set; otherwise records it in flags.
DenseMatrix round_matrix(const DenseMatrix &m, Format fmt, FpFlags *flags = nullptr,
                         bool throw_on_overflow = false);

Vector round_vector(std::span<const Real> v, Format fmt, FpFlags *flags = nullptr);

std::vector<double> to_doubles(std::span<const Real> v);

}  // namespace sketchir

#pragma once

// Linear algebra over the field of functions. Ranks are numeric ranks at
// sample points (maximum over points); elimination is symbolic with pivots
// chosen by the zero test.

#include <cstddef>
#include <vector>

#include "flattri/symx/expr.hpp"
#include "flattri/symx/sampling.hpp"

namespace flattri::fieldla {

using symx::Expr;
using symx::ZeroTestConfig;
using Vector = std::vector<Expr>;

class FnMatrix {
 public:
  FnMatrix() = default;
  FnMatrix(std::size_t rows, std::size_t cols);
  /// Throws PreconditionError on ragged input. `cols` is used when rows is empty.
  static FnMatrix from_rows(const std::vector<Vector>& rows, std::size_t cols = 0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Expr& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Expr& at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  Vector row(std::size_t r) const;
  void append_row(const Vector& v);
  FnMatrix transpose() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Expr> entries_;
};

std::size_t generic_rank(const FnMatrix& m, const ZeroTestConfig& cfg);

/// True iff appending `v` as a row does not raise the generic rank.
bool in_span(const Vector& v, const FnMatrix& m, const ZeroTestConfig& cfg);

/// Greedy choice of rows, in order, that are independent over the function
/// field: row i is kept iff it raises the generic rank of rows 0..i.
std::vector<std::size_t> independent_rows(const FnMatrix& m, const ZeroTestConfig& cfg);

/// Basis of {v : M v = 0}. Each vector is verified against every row of M.
std::vector<Vector> nullspace(const FnMatrix& m, const ZeroTestConfig& cfg);

/// Rank of a matrix of exact rationals (used for oracles and at sample points).
std::size_t rational_rank(std::vector<std::vector<symx::Rational>> a);

}  // namespace flattri::fieldla

#pragma once

#include <algebroid/rational.hpp>

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace algebroid {

/// Dense exact matrix, row-major.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Rational> multiply(const std::vector<Rational>& x) const;
  RationalMatrix transpose() const;
  friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

/// y with y^T A = 0 and y^T b = 1: certifies that A x = b is inconsistent.
struct NoSolution {
  std::vector<Rational> witness;
};

using SolveResult = std::variant<std::vector<Rational>, NoSolution>;

/// Fraction-free Bareiss elimination; rank of a dense matrix.
std::size_t bareiss_rank(const RationalMatrix& a);
SolveResult solve_linear(const RationalMatrix& a, const std::vector<Rational>& b);
std::vector<std::vector<Rational>> kernel_basis(const RationalMatrix& a);

// ------------------------------------------------------------ sparse layer

/// Sorted (index, value) pairs, no zeros.
using SparseVector = std::vector<std::pair<std::size_t, Rational>>;

/// Column-major sparse matrix: columns[j] is the image of domain basis j.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<SparseVector> columns;

  RationalMatrix to_dense() const;
  std::vector<Rational> multiply(const std::vector<Rational>& x) const;
};

}  // namespace algebroid

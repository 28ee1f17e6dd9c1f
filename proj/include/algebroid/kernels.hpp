#pragma once

// Parallel kernels for the windowed linear algebra, each with a serial
// reference that the tests compare against bit for bit.

#include <algebroid/linalg.hpp>

#include <functional>

namespace algebroid {

enum class Exec { serial, parallel };

/// Row-reduced echelon form over Z, produced fraction-free: each row is an
/// integer vector with content 1; pivot entries are positive.
struct Echelon {
  std::size_t cols = 0;
  std::vector<std::size_t> pivot_cols;                          // ascending
  std::vector<std::vector<std::pair<std::size_t, Integer>>> rows;  // rows[i] has pivot pivot_cols[i]

  std::size_t rank() const { return pivot_cols.size(); }
};

/// Gauss-Jordan on the rows of `m` (its transpose when `m` is stored by columns).
Echelon row_reduce(const SparseMatrix& m, Exec exec = Exec::parallel);

namespace kernels {
Echelon row_reduce_serial(const SparseMatrix& m);
Echelon row_reduce_omp(const SparseMatrix& m);

/// Evaluates `image(j)` for j in [0, n), in parallel or serially; the results
/// land at their index, so the output does not depend on scheduling.
template <class T>
std::vector<T> map_indices(std::size_t n, const std::function<T(std::size_t)>& image, Exec exec);
}  // namespace kernels

std::size_t sparse_rank(const SparseMatrix& m, Exec exec = Exec::parallel);
std::vector<SparseVector> sparse_kernel(const SparseMatrix& m, Exec exec = Exec::parallel);
/// Solves m x = b.  nullopt when inconsistent.
std::optional<std::vector<Rational>> sparse_solve(const SparseMatrix& m, const SparseVector& b,
                                                  Exec exec = Exec::parallel);

int max_threads();

}  // namespace algebroid

#include <algebroid/kernels_impl.hpp>

#include <algebroid/linalg.hpp>

#include <algorithm>

namespace algebroid {

RationalMatrix::RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

std::vector<Rational> RationalMatrix::multiply(const std::vector<Rational>& x) const {
  if (x.size() != cols_) throw std::invalid_argument("dimension mismatch");
  std::vector<Rational> y(rows_, 0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) y[r] += (*this)(r, c) * x[c];
  return y;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

namespace {

/// Scales each row of `a` to integers.
std::vector<std::vector<Integer>> integer_rows(const RationalMatrix& a) {
  std::vector<std::vector<Integer>> m(a.rows(), std::vector<Integer>(a.cols()));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Integer l = 1;
    for (std::size_t c = 0; c < a.cols(); ++c) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), a(r, c).get_den_mpz_t());
    for (std::size_t c = 0; c < a.cols(); ++c) {
      Rational s = a(r, c) * Rational(l);
      m[r][c] = s.get_num();
    }
  }
  return m;
}

struct BareissForm {
  std::vector<std::vector<Integer>> m;  // echelon form, rows [0, rank) nonzero
  std::vector<std::size_t> pivots;
};

/// Bareiss: after step k every entry below is a (k+1)-minor, so the division
/// by the previous pivot is exact.
BareissForm bareiss(std::vector<std::vector<Integer>> m, std::size_t cols) {
  BareissForm out;
  const std::size_t rows = m.size();
  Integer prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && m[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        Integer v = m[r][c] * m[i][j] - m[i][c] * m[r][j];
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        m[i][j] = v;
      }
      m[i][c] = 0;
    }
    prev = m[r][c];
    out.pivots.push_back(c);
    ++r;
  }
  out.m = std::move(m);
  return out;
}

/// Back substitution on the echelon form: solution with free variables = `free_values`.
std::vector<Rational> back_substitute(const BareissForm& f, std::size_t cols, std::size_t unknowns,
                                      const std::vector<Rational>& free_values) {
  std::vector<Rational> x(unknowns, 0);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : f.pivots) is_pivot[p] = true;
  for (std::size_t c = 0; c < unknowns; ++c)
    if (!is_pivot[c]) x[c] = free_values[c];
  for (std::size_t i = f.pivots.size(); i-- > 0;) {
    const std::size_t p = f.pivots[i];
    Rational acc = (cols > unknowns) ? Rational(f.m[i][unknowns]) : Rational(0);
    for (std::size_t c = p + 1; c < unknowns; ++c) acc -= Rational(f.m[i][c]) * x[c];
    x[p] = acc / Rational(f.m[i][p]);
  }
  return x;
}

}  // namespace

std::size_t bareiss_rank(const RationalMatrix& a) { return bareiss(integer_rows(a), a.cols()).pivots.size(); }

SolveResult solve_linear(const RationalMatrix& a, const std::vector<Rational>& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve_linear: dimension mismatch");
  RationalMatrix aug(a.rows(), a.cols() + 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) aug(r, c) = a(r, c);
    aug(r, a.cols()) = b[r];
  }
  BareissForm f = bareiss(integer_rows(aug), aug.cols());
  if (!f.pivots.empty() && f.pivots.back() == a.cols()) {
    // Inconsistent: find y with [A^T; b^T] y = e_last.
    RationalMatrix t(a.cols() + 1, a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
      t(a.cols(), r) = b[r];
    }
    std::vector<Rational> rhs(a.cols() + 1, 0);
    rhs.back() = 1;
    auto y = solve_linear(t, rhs);
    return NoSolution{std::get<std::vector<Rational>>(y)};
  }
  return back_substitute(f, aug.cols(), a.cols(), std::vector<Rational>(a.cols(), 0));
}

std::vector<std::vector<Rational>> kernel_basis(const RationalMatrix& a) {
  BareissForm f = bareiss(integer_rows(a), a.cols());
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto p : f.pivots) is_pivot[p] = true;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (is_pivot[c]) continue;
    std::vector<Rational> free(a.cols(), 0);
    free[c] = 1;
    basis.push_back(back_substitute(f, a.cols(), a.cols(), free));
  }
  return basis;
}

RationalMatrix SparseMatrix::to_dense() const {
  RationalMatrix d(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (const auto& [i, v] : columns[j]) d(i, j) = v;
  return d;
}

std::vector<Rational> SparseMatrix::multiply(const std::vector<Rational>& x) const {
  std::vector<Rational> y(rows, 0);
  for (std::size_t j = 0; j < cols; ++j) {
    if (x[j] == 0) continue;
    for (const auto& [i, v] : columns[j]) y[i] += v * x[j];
  }
  return y;
}

}  // namespace algebroid

#include <algebroid/kernels.hpp>

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace algebroid {

namespace {

using IntRow = std::vector<std::pair<std::size_t, Integer>>;

std::vector<IntRow> integer_rows(const SparseMatrix& m) {
  std::vector<std::vector<std::pair<std::size_t, Rational>>> qrows(m.rows);
  for (std::size_t j = 0; j < m.cols; ++j)
    for (const auto& [i, v] : m.columns[j]) qrows.at(i).emplace_back(j, v);
  std::vector<IntRow> rows(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    Integer l = 1;
    for (const auto& [j, v] : qrows[i]) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
    rows[i].reserve(qrows[i].size());
    for (const auto& [j, v] : qrows[i]) {
      Rational s = v * Rational(l);
      rows[i].emplace_back(j, s.get_num());
    }
  }
  return rows;
}

const Integer* entry(const IntRow& r, std::size_t col) {
  auto it = std::lower_bound(r.begin(), r.end(), col, [](const auto& e, std::size_t c) { return e.first < c; });
  return (it != r.end() && it->first == col) ? &it->second : nullptr;
}

/// r <- piv_c * r - r_c * piv, then divide by the content of r.
void eliminate(IntRow& r, const IntRow& piv, const Integer& piv_c, const Integer& r_c) {
  IntRow out;
  out.reserve(r.size() + piv.size());
  std::size_t a = 0, b = 0;
  Integer tmp;
  while (a < r.size() || b < piv.size()) {
    if (b == piv.size() || (a < r.size() && r[a].first < piv[b].first)) {
      out.emplace_back(r[a].first, piv_c * r[a].second);
      ++a;
    } else if (a == r.size() || piv[b].first < r[a].first) {
      out.emplace_back(piv[b].first, -r_c * piv[b].second);
      ++b;
    } else {
      tmp = piv_c * r[a].second - r_c * piv[b].second;
      if (tmp != 0) out.emplace_back(r[a].first, tmp);
      ++a;
      ++b;
    }
  }
  Integer g = 0;
  for (const auto& [j, v] : out) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    if (g == 1) break;
  }
  if (g > 1)
    for (auto& [j, v] : out) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
  r = std::move(out);
}

void make_primitive(IntRow& r) {
  Integer g = 0;
  for (const auto& [j, v] : r) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
  if (g > 1)
    for (auto& [j, v] : r) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
}

template <bool Parallel>
Echelon gauss_jordan(const SparseMatrix& m) {
  std::vector<IntRow> rows = integer_rows(m);
  for (auto& r : rows) make_primitive(r);
  std::vector<char> used(rows.size(), 0);
  std::vector<std::size_t> pivot_rows;
  Echelon out;
  out.cols = m.cols;
  std::vector<std::size_t> targets;
  for (std::size_t c = 0; c < m.cols; ++c) {
    // Unused rows are already cleared left of c, so their leading entry decides.
    std::size_t best = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (used[i] || rows[i].empty() || rows[i].front().first != c) continue;
      if (best == rows.size() || rows[i].size() < rows[best].size()) best = i;
    }
    if (best == rows.size()) continue;
    used[best] = 1;
    IntRow& piv = rows[best];
    if (piv.front().second < 0)
      for (auto& [j, v] : piv) v = -v;
    targets.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == best || rows[i].empty()) continue;
      if (used[i] ? entry(rows[i], c) != nullptr : rows[i].front().first == c) targets.push_back(i);
    }
    const Integer piv_c = piv.front().second;
    if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
      for (long long t = 0; t < static_cast<long long>(targets.size()); ++t) {
        IntRow& r = rows[targets[static_cast<std::size_t>(t)]];
        const Integer r_c = *entry(r, c);
        eliminate(r, piv, piv_c, r_c);
      }
    } else {
      for (std::size_t t : targets) {
        IntRow& r = rows[t];
        const Integer r_c = *entry(r, c);
        eliminate(r, piv, piv_c, r_c);
      }
    }
    out.pivot_cols.push_back(c);
    pivot_rows.push_back(best);
  }
  for (std::size_t i : pivot_rows) out.rows.push_back(std::move(rows[i]));
  return out;
}

}  // namespace

namespace kernels {
Echelon row_reduce_serial(const SparseMatrix& m) { return gauss_jordan<false>(m); }
Echelon row_reduce_omp(const SparseMatrix& m) { return gauss_jordan<true>(m); }
}  // namespace kernels

Echelon row_reduce(const SparseMatrix& m, Exec exec) {
  return exec == Exec::serial ? kernels::row_reduce_serial(m) : kernels::row_reduce_omp(m);
}

std::size_t sparse_rank(const SparseMatrix& m, Exec exec) { return row_reduce(m, exec).rank(); }

std::vector<SparseVector> sparse_kernel(const SparseMatrix& m, Exec exec) {
  Echelon e = row_reduce(m, exec);
  std::vector<char> is_pivot(m.cols, 0);
  for (auto p : e.pivot_cols) is_pivot[p] = 1;
  // column f -> list of (pivot row) entries
  std::vector<std::vector<std::pair<std::size_t, Rational>>> by_free(m.cols);
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    const Integer& p = e.rows[i].front().second;
    for (std::size_t k = 1; k < e.rows[i].size(); ++k) {
      const auto& [j, v] = e.rows[i][k];
      by_free[j].emplace_back(e.pivot_cols[i], -Rational(v) / Rational(p));
    }
  }
  std::vector<SparseVector> basis;
  for (std::size_t f = 0; f < m.cols; ++f) {
    if (is_pivot[f]) continue;
    SparseVector v = by_free[f];
    v.emplace_back(f, 1);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<std::vector<Rational>> sparse_solve(const SparseMatrix& m, const SparseVector& b, Exec exec) {
  SparseMatrix aug = m;
  aug.cols = m.cols + 1;
  aug.columns.push_back(b);
  Echelon e = row_reduce(aug, exec);
  if (!e.pivot_cols.empty() && e.pivot_cols.back() == m.cols) return std::nullopt;
  std::vector<Rational> x(m.cols, 0);
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    const auto& row = e.rows[i];
    if (row.back().first == m.cols) x[e.pivot_cols[i]] = Rational(row.back().second) / Rational(row.front().second);
  }
  return x;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace algebroid

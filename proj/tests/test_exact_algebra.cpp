#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algebroid/kernels.hpp>
#include <algebroid/ring.hpp>

#include "support.hpp"

using namespace algebroid;
using testing_support::random_element;

TEST_CASE("rational normalization") {
  Rational a(4, -6);
  a.canonicalize();
  CHECK(a.get_den() == 3);
  CHECK(a.get_num() == -2);
  CHECK(to_string(Rational(2, 3) + Rational(1, 3)) == "1");
  CHECK(to_fraction_string(Rational(5)) == "5/1");
  CHECK(parse_rational("-6/4") == Rational(-3, 2));
  CHECK_THROWS(parse_rational("1/0"));
}

TEST_CASE("ring arithmetic examples") {
  auto r = ChartRing::polynomial({"x", "y"});
  auto x = RingElement::variable(r, 0);
  auto one = RingElement(r, 1);
  CHECK(ring_arith(x + one, x - one, '*') == x * x - one);
  CHECK((x * x - one).to_string() == "x^2 - 1");
  auto third = Rational(1, 3);
  CHECK(Rational(2, 3) * x + third * x == x);

  auto lz = ChartRing::laurent({"x"});
  auto lx = RingElement::variable(lz, 0);
  CHECK(RingElement::variable(lz, 0, -1) * lx == RingElement(lz, 1));
  CHECK(lx.inverse() == RingElement::variable(lz, 0, -1));
  CHECK_THROWS_AS((x + one).inverse(), StructuralError);
}

TEST_CASE("owner mismatch is a structural error") {
  auto r1 = ChartRing::polynomial({"x"});
  auto r2 = ChartRing::polynomial({"x"});
  CHECK_THROWS_AS(RingElement::variable(r1, 0) + RingElement::variable(r2, 0), StructuralError);
  CHECK_THROWS_AS(RingElement::monomial(r1, {-1}), StructuralError);
}

TEST_CASE("derivation examples") {
  auto r = ChartRing::polynomial({"x", "y"});
  auto x = RingElement::variable(r, 0), y = RingElement::variable(r, 1);
  CHECK(apply_derivation("d/dx", x * x * y) == Rational(2) * x * y);
  CHECK(apply_derivation("d/dy", x * x).is_zero());
  auto lz = ChartRing::laurent({"z"});
  auto zinv = RingElement::variable(lz, 0, -1);
  CHECK(apply_derivation("d/dz", zinv) == -RingElement::variable(lz, 0, -2));
  CHECK_THROWS(apply_derivation("d/dq", x));
}

TEST_CASE("declared derivations extend by Leibniz") {
  Terms euler;
  euler[{1}] = 1;
  auto r = ChartRing::Builder().variable("z", false).derivation("E", {euler}).build();
  auto z = RingElement::variable(r, 0);
  CHECK(apply_derivation("E", z * z * z) == Rational(3) * z * z * z);
}

TEST_CASE("ring map examples") {
  auto w = ChartRing::polynomial({"w"});
  auto z = ChartRing::laurent({"z"});
  RingMap m(w, z, {RingElement::variable(z, 0, -1)});
  auto wv = RingElement::variable(w, 0);
  CHECK(apply_ring_map(m, wv * wv) == RingElement::variable(z, 0, -2));
  CHECK(apply_ring_map(m, RingElement(w, 1) + wv) == RingElement(z, 1) + RingElement::variable(z, 0, -1));
  auto id = RingMap::identity(w);
  CHECK(id(wv * wv + wv) == wv * wv + wv);
  // A Laurent source needs unit images.
  auto zz = ChartRing::laurent({"t"});
  CHECK_THROWS_AS(RingMap(zz, w, {wv + RingElement(w, 1)}), StructuralError);
  // w -> z^-1 in a polynomial target breaks the exponent bound.
  auto pz = ChartRing::polynomial({"z"});
  CHECK_THROWS_AS(RingMap(zz, pz, {RingElement::variable(pz, 0)})(RingElement::variable(zz, 0, -1)),
                  StructuralError);
}

TEST_CASE("monomial inverse of a chart map") {
  auto w = ChartRing::polynomial({"w"});
  auto z = ChartRing::laurent({"z"});
  RingMap m(w, z, {RingElement::variable(z, 0, -1)});
  auto inv = m.monomial_inverse();
  REQUIRE(inv);
  CHECK((*inv)[0].first == 1);
  CHECK((*inv)[0].second == std::vector<int>{-1});
}

TEST_CASE("ring axioms on random triples") {
  std::mt19937 g(11);
  auto r = ChartRing::Builder().variable("x", false).variable("z", true).build();
  for (int it = 0; it < 200; ++it) {
    auto a = random_element(g, r, 3), b = random_element(g, r, 3), c = random_element(g, r, 3);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * b == b * a);
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a - a == RingElement(r));
  }
}

TEST_CASE("Leibniz rule for coordinate derivations") {
  std::mt19937 g(12);
  auto r = ChartRing::Builder().variable("x", false).variable("y", false).variable("z", true).build();
  for (int it = 0; it < 200; ++it) {
    auto f = random_element(g, r, 4), h = random_element(g, r, 4);
    for (std::size_t v = 0; v < 3; ++v) CHECK((f * h).partial(v) == f * h.partial(v) + h * f.partial(v));
  }
}

TEST_CASE("ring maps are homomorphisms") {
  std::mt19937 g(13);
  auto src = ChartRing::polynomial({"u", "v"});
  auto tgt = ChartRing::Builder().variable("x", false).variable("z", true).build();
  RingMap m(src, tgt,
            {RingElement::variable(tgt, 0) + RingElement::variable(tgt, 1, -1),
             RingElement::variable(tgt, 0) * RingElement::variable(tgt, 1, 2)});
  for (int it = 0; it < 100; ++it) {
    auto f = random_element(g, src, 3), h = random_element(g, src, 3);
    CHECK(m(f * h) == m(f) * m(h));
    CHECK(m(f + h) == m(f) + m(h));
  }
}

TEST_CASE("linear algebra examples") {
  RationalMatrix a{{1, 1}, {2, 2}};
  auto k = kernel_basis(a);
  REQUIRE(k.size() == 1);
  CHECK(k[0] == std::vector<Rational>{-1, 1});  // spans (1,-1)
  RationalMatrix id{{1, 0}, {0, 1}};
  CHECK(kernel_basis(id).empty());
  RationalMatrix b{{1, 0}, {0, 0}};
  auto s = solve_linear(b, {0, 1});
  REQUIRE(std::holds_alternative<NoSolution>(s));
  const auto& y = std::get<NoSolution>(s).witness;
  // y^T A = 0, y^T b = 1
  CHECK(y[0] * 1 + y[1] * 0 == 0);
  CHECK(y[1] == 1);
  CHECK_THROWS(solve_linear(b, {1}));
}

namespace {

RationalMatrix random_matrix(std::mt19937& g, std::size_t rows, std::size_t cols, int density) {
  RationalMatrix m(rows, cols);
  std::uniform_int_distribution<int> coin(0, 99);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (coin(g) < density) m(r, c) = testing_support::random_rational(g, 4);
  return m;
}

SparseMatrix to_sparse(const RationalMatrix& d) {
  SparseMatrix s;
  s.rows = d.rows();
  s.cols = d.cols();
  s.columns.resize(d.cols());
  for (std::size_t c = 0; c < d.cols(); ++c)
    for (std::size_t r = 0; r < d.rows(); ++r)
      if (d(r, c) != 0) s.columns[c].emplace_back(r, d(r, c));
  return s;
}

/// Independent rank oracle: plain Gaussian elimination over Q.
std::size_t rank_oracle(RationalMatrix m) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t p = rank;
    while (p < m.rows() && m(p, c) == 0) ++p;
    if (p == m.rows()) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(rank, j));
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      Rational f = m(i, c) / m(rank, c);
      for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(rank, j);
    }
    ++rank;
  }
  return rank;
}

}  // namespace

TEST_CASE("solutions and kernels verify by substitution") {
  std::mt19937 g(21);
  for (int it = 0; it < 60; ++it) {
    std::size_t rows = 1 + g() % 7, cols = 1 + g() % 7;
    auto a = random_matrix(g, rows, cols, 50);
    for (const auto& v : kernel_basis(a)) CHECK(a.multiply(v) == std::vector<Rational>(rows, 0));
    CHECK(kernel_basis(a).size() + bareiss_rank(a) == cols);
    std::vector<Rational> b(rows);
    for (auto& x : b) x = testing_support::random_rational(g);
    auto s = solve_linear(a, b);
    if (auto* x = std::get_if<std::vector<Rational>>(&s)) {
      CHECK(a.multiply(*x) == b);
    } else {
      const auto& y = std::get<NoSolution>(s).witness;
      auto yt = a.transpose().multiply(y);
      CHECK(yt == std::vector<Rational>(cols, 0));
      Rational yb = 0;
      for (std::size_t i = 0; i < rows; ++i) yb += y[i] * b[i];
      CHECK(yb == 1);
    }
  }
}

TEST_CASE("dense and sparse ranks agree with the oracle") {
  std::mt19937 g(22);
  for (int it = 0; it < 80; ++it) {
    std::size_t rows = 1 + g() % 12, cols = 1 + g() % 12;
    auto a = random_matrix(g, rows, cols, 30);
    const auto expect = rank_oracle(a);
    CHECK(bareiss_rank(a) == expect);
    CHECK(sparse_rank(to_sparse(a), Exec::serial) == expect);
    CHECK(sparse_rank(to_sparse(a), Exec::parallel) == expect);
  }
}

TEST_CASE("parallel elimination is bit-identical to the serial reference") {
  std::mt19937 g(23);
  for (int it = 0; it < 30; ++it) {
    auto a = to_sparse(random_matrix(g, 20 + g() % 20, 20 + g() % 20, 15));
    auto s = kernels::row_reduce_serial(a);
    auto p = kernels::row_reduce_omp(a);
    CHECK(s.pivot_cols == p.pivot_cols);
    CHECK(s.rows == p.rows);
  }
}

TEST_CASE("sparse kernel and solve verify by substitution") {
  std::mt19937 g(24);
  for (int it = 0; it < 40; ++it) {
    auto d = random_matrix(g, 1 + g() % 9, 1 + g() % 9, 35);
    auto a = to_sparse(d);
    for (const auto& v : sparse_kernel(a)) {
      std::vector<Rational> x(a.cols, 0);
      for (const auto& [i, q] : v) x[i] = q;
      CHECK(a.multiply(x) == std::vector<Rational>(a.rows, 0));
    }
    SparseVector b;
    for (std::size_t i = 0; i < a.rows; ++i)
      if (g() % 2) b.emplace_back(i, testing_support::random_rational(g, 3));
    b.erase(std::remove_if(b.begin(), b.end(), [](const auto& e) { return e.second == 0; }), b.end());
    auto x = sparse_solve(a, b);
    std::vector<Rational> bd(a.rows, 0);
    for (const auto& [i, q] : b) bd[i] = q;
    auto dense = solve_linear(d, bd);
    CHECK(x.has_value() == std::holds_alternative<std::vector<Rational>>(dense));
    if (x) CHECK(a.multiply(*x) == bd);
  }
}

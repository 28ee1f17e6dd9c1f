#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algebroid/connection.hpp>

#include "support.hpp"

using namespace algebroid;
using testing_support::random_element;
using testing_support::random_section;

namespace {

Matrix random_matrix(std::mt19937& g, const RingPtr& r, std::size_t n, int deg) {
  Matrix m = zero_matrix(r, n);
  for (auto& row : m)
    for (auto& e : row) e = random_element(g, r, deg, 2);
  return m;
}

Connection random_connection(std::mt19937& g, const AlgebroidPtr& l, std::size_t r, int deg) {
  std::vector<Matrix> comps;
  for (std::size_t i = 0; i < l->rank(); ++i) comps.push_back(random_matrix(g, l->base(), r, deg));
  return Connection(l, r, comps);
}

/// nabla_u nabla_v s - nabla_v nabla_u s - nabla_[u,v] s, straight from the operators.
ModuleVector curvature_oracle(const Connection& c, const Section& u, const Section& v, const ModuleVector& s) {
  auto a = c.covariant(u, c.covariant(v, s));
  auto b = c.covariant(v, c.covariant(u, s));
  auto w = c.covariant(bracket(u, v), s);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] - b[i] - w[i];
  return a;
}

std::vector<AlgebroidPtr> catalog() {
  auto r2 = ChartRing::polynomial({"x", "y"});
  auto r3 = ChartRing::polynomial({"x", "y", "z"});
  auto x = RingElement::variable(r3, 0), y = RingElement::variable(r3, 1), z = RingElement::variable(r3, 2);
  std::vector<std::vector<RingElement>> pi(3, std::vector<RingElement>(3, RingElement(r3)));
  pi[0][1] = z, pi[1][0] = -z, pi[1][2] = x, pi[2][1] = -x, pi[2][0] = y, pi[0][2] = -y;
  return {make_tangent(r2), make_log(r2, {0, 1}), make_poisson(r3, pi),
          make_lie_algebra_bundle(r2, 3, {{0, 1, 2, 1}, {0, 2, 1, -1}, {1, 2, 0, 1}})};
}

}  // namespace

TEST_CASE("curvature of d + x dy") {
  auto r = ChartRing::polynomial({"x", "y"});
  auto t = make_tangent(r);
  auto x = RingElement::variable(r, 0);
  Connection c(t, 1, {Matrix{{RingElement(r)}}, Matrix{{x}}});
  auto f = curvature(c);
  CHECK(f(0, 1)[0][0] == RingElement(r, 1));
  CHECK(f(1, 0)[0][0] == RingElement(r, -1));
  CHECK_FALSE(is_flat(c));
  auto tr = chern_trace_form(c, 1);
  CHECK(tr == wedge(LForm::dual(t, 0), LForm::dual(t, 1)));
  CHECK(flatness_witness(c)->to_string(*t) == "F(dx,dy)[1,1] = 1");
}

TEST_CASE("gauge-trivial connections are flat") {
  std::mt19937 g(51);
  auto r = ChartRing::polynomial({"x", "y"});
  auto t = make_tangent(r);
  for (int it = 0; it < 10; ++it) {
    auto f = random_element(g, r, 3);
    auto df = d_L(LForm::function(t, f));
    Connection c(t, 1, {Matrix{{df.coefficient({0})}}, Matrix{{df.coefficient({1})}}});
    CHECK(is_flat(c));
  }
}

TEST_CASE("Lie algebra bundle curvature is [phi_i, phi_j] - c phi_k") {
  std::mt19937 g(52);
  auto r = ChartRing::polynomial({"x"});
  auto l = catalog()[3];
  auto rr = l->base();
  auto c = random_connection(g, l, 2, 1);
  auto f = curvature(c);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      Matrix expect = c.component(i) * c.component(j) - c.component(j) * c.component(i);
      for (std::size_t k = 0; k < 3; ++k) expect = expect - scale(l->c(i, j, k), c.component(k));
      CHECK(f(i, j) == expect);
    }
}

TEST_CASE("Higgs and co-Higgs fields") {
  auto r = ChartRing::polynomial({"x", "y"});
  auto x = RingElement::variable(r, 0), one = RingElement(r, 1), zero = RingElement(r);
  Matrix p1{{zero, one}, {zero, zero}}, p2{{zero, x}, {zero, zero}};
  auto higgs = make_trivial_bundle(r, 2);
  CHECK(is_flat(Connection(higgs, 2, {p1, p2})));
  auto cohiggs = make_poisson(r, {{zero, zero}, {zero, zero}});
  CHECK(is_flat(Connection(cohiggs, 2, {p1, p2})));
  Matrix p3{{zero, zero}, {one, zero}};
  CHECK_FALSE(is_flat(Connection(higgs, 2, {p1, p3})));
}

TEST_CASE("curvature matches the operator commutator") {
  std::mt19937 g(53);
  for (const auto& l : catalog()) {
    for (int it = 0; it < 5; ++it) {
      auto c = random_connection(g, l, 2, 1);
      auto f = curvature(c);
      auto u = random_section(g, l, 1), v = random_section(g, l, 1);
      ModuleVector s{random_element(g, l->base(), 2), random_element(g, l->base(), 2)};
      CHECK(matrix_apply(f.evaluate(u, v), s) == curvature_oracle(c, u, v, s));
    }
  }
}

TEST_CASE("curvature is function-linear") {
  std::mt19937 g(54);
  for (const auto& l : catalog()) {
    auto c = random_connection(g, l, 2, 1);
    auto f = curvature(c);
    for (int it = 0; it < 5; ++it) {
      auto u = random_section(g, l, 1), v = random_section(g, l, 1);
      auto h = random_element(g, l->base(), 2);
      CHECK(f.evaluate(h * u, v) == scale(h, f.evaluate(u, v)));
      CHECK(f.evaluate(u, v) == scale(RingElement(l->base(), -1), f.evaluate(v, u)));
    }
  }
}

TEST_CASE("extension squares to the curvature") {
  std::mt19937 g(55);
  for (const auto& l : catalog()) {
    auto c = random_connection(g, l, 2, 1);
    auto f = curvature(c);
    ModuleVector s{random_element(g, l->base(), 2), random_element(g, l->base(), 2)};
    auto sec = EValuedForm::section(l, s);
    auto once = extend_connection(c, sec);
    // Degree 0 reduces to nabla.
    for (std::size_t i = 0; i < l->rank(); ++i) {
      auto v = c.covariant(i, s);
      for (std::size_t b = 0; b < 2; ++b) CHECK(once.parts[b].coefficient({static_cast<int>(i)}) == v[b]);
    }
    auto twice = extend_connection(c, once);
    for (const auto& t : index_tuples(l->rank(), 2)) {
      auto fs = matrix_apply(f(t[0], t[1]), s);
      for (std::size_t b = 0; b < 2; ++b) CHECK(twice.parts[b].coefficient(t) == fs[b]);
    }
  }
}

TEST_CASE("flat connections give a complex in every degree") {
  auto r = ChartRing::polynomial({"x", "y", "z"});
  auto t = make_tangent(r);
  auto x = RingElement::variable(r, 0);
  // d + d(x^2) on a line bundle: A = (2x, 0, 0).
  Connection c(t, 1, {Matrix{{Rational(2) * x}}, Matrix{{RingElement(r)}}, Matrix{{RingElement(r)}}});
  REQUIRE(is_flat(c));
  std::mt19937 g(56);
  for (std::size_t p = 0; p <= 1; ++p) {
    EValuedForm w = EValuedForm::zero(t, 1, p);
    w.parts[0] = testing_support::random_form(g, t, p, 2);
    CHECK(extend_connection(c, extend_connection(c, w)).is_zero());
  }
}

TEST_CASE("trace forms are closed and flat connections have none") {
  std::mt19937 g(57);
  for (const auto& l : catalog()) {
    auto c = random_connection(g, l, 2, 1);
    auto t1 = chern_trace_form(c, 1);
    CHECK(d_L(t1).is_zero());
    if (l->rank() >= 4) CHECK(d_L(chern_trace_form(c, 2)).is_zero());
    CHECK(chern_trace_form(Connection::trivial(l, 2), 1).is_zero());
  }
  auto r4 = ChartRing::polynomial({"a", "b", "c", "d"});
  auto t4 = make_tangent(r4);
  auto a = RingElement::variable(r4, 0), b = RingElement::variable(r4, 1);
  auto zero = RingElement(r4);
  // Rank-1 connection a db + c dd (F = da^db + dc^dd): tr F^2 = 2 da^db^dc^dd.
  Connection c(t4, 1,
               {Matrix{{zero}}, Matrix{{a}}, Matrix{{zero}}, Matrix{{RingElement::variable(r4, 2)}}});
  auto c2 = chern_trace_form(c, 2);
  CHECK(c2.coefficient({0, 1, 2, 3}) == RingElement(r4, 2));
  CHECK(chern_trace_form(Connection::trivial(t4, 2), 2).is_zero());
  (void)b;
  CHECK_THROWS(chern_trace_form(c, 3));
}

TEST_CASE("k=1 trace forms of two connections differ by an exact form") {
  std::mt19937 g(58);
  for (const auto& l : catalog()) {
    auto c1 = random_connection(g, l, 2, 1), c2 = random_connection(g, l, 2, 1);
    auto diff = chern_trace_form(c1, 1) - chern_trace_form(c2, 1);
    auto res = exactness_solve(diff, {4, 3});
    REQUIRE(res.status == ExactnessResult::Status::primitive);
    CHECK(d_L(*res.primitive) == diff);
  }
}

TEST_CASE("trace obstruction") {
  auto r = ChartRing::polynomial({"x", "y"});
  auto t = make_tangent(r);
  auto vol = wedge(LForm::dual(t, 0), LForm::dual(t, 1));
  auto ok = obstruction_trace_check(Connection::trivial(t, 1), vol, {8, 12});
  CHECK(ok.status == ObstructionResult::Status::consistent);
  CHECK(*ok.exactness.primitive == RingElement::variable(r, 0) * LForm::dual(t, 1));
  CHECK(obstruction_trace_check(Connection::trivial(t, 1), LForm(t, 2), {8, 12}).status ==
        ObstructionResult::Status::consistent);

  auto lr = ChartRing::laurent({"x", "y"});
  auto lt = make_tangent(lr);
  auto q = RingElement::variable(lr, 0, -1) * RingElement::variable(lr, 1, -1) *
           wedge(LForm::dual(lt, 0), LForm::dual(lt, 1));
  auto bad = obstruction_trace_check(Connection::trivial(lt, 2), q, {8, 12});
  CHECK(bad.status == ObstructionResult::Status::obstructed);
  CHECK(bad.exactness.residue->value == 2);
  auto r3 = ChartRing::polynomial({"x", "y", "z"});
  auto t3 = make_tangent(r3);
  auto open = RingElement::variable(r3, 0) * wedge(LForm::dual(t3, 1), LForm::dual(t3, 2));
  CHECK_THROWS_AS(obstruction_trace_check(Connection::trivial(t3, 1), open, {8, 12}), StructuralError);
}

TEST_CASE("pullback along a foliation commutes with curvature") {
  std::mt19937 g(59);
  auto r = ChartRing::polynomial({"x", "y"});
  auto t = make_tangent(r);
  auto x = RingElement::variable(r, 0), one = RingElement(r, 1), zero = RingElement(r);
  auto fol = make_foliation(r, {VectorField{one, zero}, VectorField{x, one}});
  AlgebroidMorphism inc{fol, t, {Section::basis(t, 0), x * Section::basis(t, 0) + Section::basis(t, 1)}};
  REQUIRE_FALSE(inc.check());
  for (int it = 0; it < 5; ++it) {
    auto c = random_connection(g, t, 2, 2);
    auto lhs = curvature(pullback(c, inc));
    auto rhs = pullback(curvature(c), inc);
    CHECK(lhs.entries == rhs.entries);
  }
}

TEST_CASE("matrix inverse over a Laurent ring") {
  auto z = ChartRing::laurent({"z"});
  auto zz = RingElement::variable(z, 0);
  Matrix g{{zz, RingElement(z, 1)}, {RingElement(z), zz}};
  auto inv = inverse(g);
  REQUIRE(inv);
  CHECK(g * *inv == identity_matrix(z, 2));
  auto p = ChartRing::polynomial({"x"});
  CHECK_FALSE(inverse(Matrix{{RingElement::variable(p, 0)}}).has_value());
}

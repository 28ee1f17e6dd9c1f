#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algebroid/matched_pair.hpp>

#include "matched_catalog.hpp"
#include "support.hpp"

using namespace algebroid;
using namespace testing_support;

namespace {

const TruncationWindow small{3, 2};

/// The algebroid axioms of the force-built twilled sum, a second route to the verdict.
bool twilled_axioms_hold(const MatchedPairData& m) {
  return verify_axioms(*twilled_sum(m, true)) == std::nullopt;
}

std::vector<MatchedPairData> catalog() {
  auto r = ChartRing::polynomial({"x"});
  auto x = RingElement::variable(r, 0);
  auto one = RingElement(r, Rational(1));
  auto zero = RingElement(r);
  return {
      two_foliation(),
      matched_from_decomposition(skew_frame_algebroid(), 1, "skew"),
      matched_from_decomposition(sl2_algebroid(), 2, "borel"),
      matched_from_decomposition(sl2_algebroid(true), 1, "borel_swapped"),
      abelian_family(r, Matrix{{x, zero}, {one, x}}, {zero, zero}),
  };
}

/// Perturbations that keep both actions flat.
std::vector<MatchedPairData> perturbed() {
  auto r = ChartRing::polynomial({"x"});
  auto x = RingElement::variable(r, 0);
  auto one = RingElement(r, Rational(1));
  auto zero = RingElement(r);
  std::vector<MatchedPairData> out;
  auto tf = two_foliation();
  const auto& r2 = tf.l1->base();
  out.push_back({tf.l1, tf.l2, tf.action12, Connection(tf.l2, 1, {Matrix{{RingElement(r2, Rational(3))}}}), "p1"});
  out.push_back({tf.l1, tf.l2, Connection(tf.l1, 1, {Matrix{{RingElement::variable(r2, 1)}}}), tf.action21, "p2"});
  out.push_back(abelian_family(r, Matrix{{zero, one}, {zero, zero}}, {one, zero}));
  out.push_back(abelian_family(r, Matrix{{x, zero}, {zero, one}}, {one, x}));
  // swapped roles: the third identity
  auto s = abelian_family(r, Matrix{{zero, one}, {zero, zero}}, {one, zero});
  out.push_back({s.l2, s.l1, s.action21, s.action12, "swapped"});
  return out;
}

}  // namespace

TEST_CASE("zero actions on abelian algebroids form the direct sum") {
  auto r = ChartRing::polynomial({"x"});
  auto l1 = make_trivial_bundle(r, 1), l2 = make_trivial_bundle(r, 2);
  MatchedPairData m{l1, l2, Connection::trivial(l1, 2), Connection::trivial(l2, 1), "direct"};
  CHECK(!verify_matched(m));
  auto t = twilled_sum(m);
  CHECK(t->rank() == 3);
  CHECK(same_structure(*t, *make_trivial_bundle(r, 3)));
}

TEST_CASE("two foliations recover the tangent algebroid") {
  auto m = two_foliation();
  CHECK(!verify_matched(m));
  auto t = twilled_sum(m);
  CHECK(t->verified());
  CHECK(same_structure(*t, *make_tangent(m.l1->base())));
}

TEST_CASE("decompositions give matched pairs whose twilled sum is the original") {
  for (auto [l, n1] : {std::pair{skew_frame_algebroid(), std::size_t{1}}, std::pair{sl2_algebroid(), std::size_t{2}},
                       std::pair{sl2_algebroid(true), std::size_t{1}}}) {
    auto m = matched_from_decomposition(l, n1);
    CHECK(!verify_matched(m));
    CHECK(same_structure(*twilled_sum(m), *l));
  }
  auto skew = matched_from_decomposition(skew_frame_algebroid(), 1);
  // d/dy + x d/dx acting on d/dx: the L1 part of [v, d/dx] = -d/dx
  CHECK(skew.action21.component(0)[0][0] == RingElement(skew.l1->base(), Rational(-1)));
}

TEST_CASE("summands must close under the bracket") {
  CHECK_THROWS_AS(matched_from_decomposition(sl2_algebroid(), 1).l1, StructuralError);
  auto r = ChartRing::polynomial({});
  auto l = make_lie_algebra_bundle(r, 3, {{0, 1, 2, 1}});
  CHECK_THROWS_AS(matched_from_decomposition(l, 2), StructuralError);
}

TEST_CASE("constant perturbation of action21 breaks the anchor identity") {
  auto m = perturbed().front();
  auto w = verify_matched(m);
  REQUIRE(w);
  CHECK(w->equation == 1);
  CHECK(w->to_string(m) == "equation 1 fails on (e1,e1): residual (3)*d/dx");
  CHECK_THROWS_AS(twilled_sum(m), StructuralError);
}

TEST_CASE("witnesses for the derivation identities") {
  auto p = perturbed();
  auto w2 = verify_matched(p[2]);
  REQUIRE(w2);
  CHECK(w2->equation == 2);
  auto w3 = verify_matched(p[4]);
  REQUIRE(w3);
  CHECK(w3->equation == 3);
}

TEST_CASE("force-built invalid pair fails the Jacobi identity") {
  auto m = perturbed()[2];
  auto t = twilled_sum(m, true);
  REQUIRE(t->witness());
  CHECK(t->witness()->kind == AxiomWitness::Kind::jacobi_failure);
}

TEST_CASE("non-flat actions are refused") {
  auto r = ChartRing::polynomial({});
  auto l2 = make_trivial_bundle(r, 2);
  auto one = RingElement(r, Rational(1)), zero = RingElement(r);
  auto l1b = make_trivial_bundle(r, 2);
  Connection bad(l2, 2, {Matrix{{zero, one}, {zero, zero}}, Matrix{{zero, zero}, {one, zero}}});
  MatchedPairData m{l1b, l2, Connection::trivial(l1b, 2), bad, "bad"};
  CHECK_THROWS_WITH_AS(verify_matched(m), doctest::Contains("L2 on L1 is not flat"), StructuralError);
}

TEST_CASE("matched verdict agrees with the axioms of the force-built twilled sum") {
  for (const auto& m : catalog()) CHECK(twilled_axioms_hold(m));
  for (const auto& m : perturbed()) CHECK(!twilled_axioms_hold(m));
}

TEST_CASE("double complex commutation iff matched") {
  for (const auto& m : catalog()) {
    CAPTURE(m.name);
    CHECK(!verify_matched(m));
    CHECK(!commutation_check(DoubleComplex(m), 3, small));
  }
  for (const auto& m : perturbed()) {
    CAPTURE(m.name);
    CHECK(verify_matched(m));
    auto f = commutation_check(DoubleComplex(m), 3, small);
    REQUIRE(f);
    CHECK(f->kind == CommutationFailure::Kind::commutation);
  }
}

TEST_CASE("randomized abelian family: commutation iff matched") {
  std::mt19937 g(4242);
  auto r = ChartRing::polynomial({"x"});
  int matched = 0, unmatched = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = zero_matrix(r, 2);
    for (auto& row : a)
      for (auto& e : row) e = random_element(g, r, 1, 1);
    std::vector<RingElement> b{random_element(g, r, 1, 1), random_element(g, r, 1, 1)};
    if (trial % 3 == 0) b = {RingElement(r), RingElement(r)};
    auto m = abelian_family(r, a, b);
    const bool ok = !verify_matched(m);
    ok ? ++matched : ++unmatched;
    CHECK(ok == !commutation_check(DoubleComplex(m), 3, small));
    CHECK(ok == twilled_axioms_hold(m));
  }
  CHECK(matched > 0);
  CHECK(unmatched > 0);
}

TEST_CASE("total differential is the twilled differential") {
  std::mt19937 g(77);
  for (const auto& m : catalog()) {
    CAPTURE(m.name);
    DoubleComplex k(m);
    auto t = twilled_sum(m);
    for (std::size_t p = 0; p <= t->rank(); ++p)
      for (int rep = 0; rep < 3; ++rep) {
        LForm theta = random_form(g, k.twilled, p, 2);
        LForm same(t, p);
        for (const auto& [tu, f] : theta.coefficients()) same.add(tu, f);
        CHECK(to_cochain(k.total(theta)) == to_cochain(d_L(same)));
      }
  }
}

TEST_CASE("exposed d2 carries the sign that makes d1 d2 = (-1)^p d2 d1") {
  auto m = matched_from_decomposition(sl2_algebroid(true), 1);
  DoubleComplex k(m);
  auto r = k.twilled->base();
  for (int p = 0; p <= 1; ++p)
    for (int q = 0; q <= 1; ++q)
      for (const auto& t : k.tuples(p, q)) {
        LForm a(k.twilled, t.size());
        a.add(t, RingElement(r, Rational(1)));
        auto lhs = k.d1(k.d2(a));
        auto rhs = k.d2(k.d1(a));
        CHECK(lhs == (p % 2 ? Rational(-1) * rhs : rhs));
      }
  CHECK(k.tuples(3, 0).empty());
  CHECK(k.tuples(0, 3).empty());
}

TEST_CASE("Künneth for zero actions over constants") {
  auto r = ChartRing::polynomial({});
  auto h = make_lie_algebra_bundle(r, 3, {{0, 1, 2, 1}});
  auto a = make_trivial_bundle(r, 1);
  MatchedPairData m{h, a, Connection::trivial(h, 1), Connection::trivial(a, 3), "heis_x_line"};
  auto cmp = total_cohomology_compare(m, {0, 1, 2, 3, 4}, {0, 1});
  std::vector<std::size_t> dims;
  for (const auto& d : cmp.total.dims) dims.push_back(d.cohomology);
  // (1,2,2,1) * (1,1)
  CHECK(dims == std::vector<std::size_t>{1, 3, 4, 3, 1});
  CHECK(cmp.agree);
}

TEST_CASE("total complex matches twilled cohomology on catalog pairs") {
  for (const auto& m : {two_foliation(), matched_from_decomposition(skew_frame_algebroid(), 1),
                        matched_from_decomposition(sl2_algebroid(), 2)}) {
    CAPTURE(m.name);
    auto cmp = total_cohomology_compare(m, {0, 1, 2}, {4, 2}, Exec::serial);
    CHECK(cmp.agree);
    CHECK(cmp.total.stable);
    CHECK(cmp.twilled.stable);
  }
  auto tf = total_cohomology_compare(two_foliation(), {0, 1, 2}, {4, 2});
  CHECK(tf.total.dims[0].cohomology == 1);
  CHECK(tf.total.dims[1].cohomology == 0);
  CHECK(tf.total.dims[2].cohomology == 0);
}

TEST_CASE("rank-0 L2 reduces to the cohomology of L1") {
  auto l1 = make_tangent(ChartRing::polynomial({"x"}));
  auto l2 = make_trivial_bundle(l1->base(), 0);
  MatchedPairData m{l1, l2, Connection::trivial(l1, 0), Connection::trivial(l2, 1), "rank0"};
  auto cmp = total_cohomology_compare(m, {0, 1}, {4, 2});
  auto direct = truncated_cohomology(l1, {0, 1}, {4, 2});
  REQUIRE(cmp.total.dims.size() == direct.dims.size());
  for (std::size_t i = 0; i < direct.dims.size(); ++i)
    CHECK(cmp.total.dims[i].cohomology == direct.dims[i].cohomology);
}

TEST_CASE("serial and parallel slices agree") {
  DoubleComplex k(matched_from_decomposition(skew_frame_algebroid(), 1));
  auto a = build_slice(k, 1, 0, small, Exec::serial);
  auto b = build_slice(k, 1, 0, small, Exec::parallel);
  CHECK(a.d1_columns == b.d1_columns);
  CHECK(a.d2_columns == b.d2_columns);
}

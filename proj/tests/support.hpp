#pragma once

#include <algebroid/forms.hpp>

#include <random>

namespace testing_support {

using namespace algebroid;

/// Small random generators with fixed seeds; tests pass the engine explicitly.
inline Rational random_rational(std::mt19937& g, int span = 5) {
  std::uniform_int_distribution<int> num(-span, span), den(1, 3);
  Rational q(num(g), den(g));
  q.canonicalize();
  return q;
}

/// Random element with up to `terms` terms, polynomial degree <= deg, Laurent extent <= ext.
inline RingElement random_element(std::mt19937& g, const RingPtr& r, int deg, int terms = 3, int ext = 2) {
  RingElement f(r);
  std::uniform_int_distribution<int> nterms(0, terms);
  const int k = nterms(g);
  for (int t = 0; t < k; ++t) {
    Exponents e(r->num_vars(), 0);
    int left = deg;
    for (std::size_t v = 0; v < e.size(); ++v) {
      if (r->is_laurent(v)) {
        e[v] = std::uniform_int_distribution<int>(-ext, ext)(g);
      } else {
        e[v] = std::uniform_int_distribution<int>(0, std::max(0, left))(g);
        left -= e[v];
      }
    }
    f += RingElement::monomial(r, e, random_rational(g));
  }
  return f;
}

inline Section random_section(std::mt19937& g, const AlgebroidPtr& l, int deg) {
  Section s = Section::zero(l);
  for (auto& c : s.coeffs) c = random_element(g, l->base(), deg);
  return s;
}

inline LForm random_form(std::mt19937& g, const AlgebroidPtr& l, std::size_t p, int deg) {
  LForm a(l, p);
  for (const auto& t : index_tuples(l->rank(), p)) a.add(t, random_element(g, l->base(), deg));
  return a;
}

inline RingElement parse_poly(const RingPtr& r, std::initializer_list<std::pair<Exponents, Rational>> terms) {
  RingElement f(r);
  for (const auto& [e, c] : terms) f += RingElement::monomial(r, e, c);
  return f;
}

}  // namespace testing_support

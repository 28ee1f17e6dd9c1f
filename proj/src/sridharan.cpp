#include <algebroid/sridharan.hpp>

#include <algorithm>
#include <sstream>

namespace algebroid {

RelationsPtr build_relations(const AlgebroidPtr& l, const LForm& q, bool force) {
  if (q.owner() != l) throw StructuralError("twist must be a form on the same algebroid");
  if (q.degree() != 2) throw StructuralError("twist must be a 2-form");
  if (!force) {
    auto dq = d_L_unchecked(q);
    if (!dq.is_zero()) throw StructuralError("twist is not closed: d_L Q = " + dq.to_string());
  }
  auto r = std::make_shared<RelationSystem>();
  r->l_ = l;
  r->q_ = q;
  return r;
}

// ---------------------------------------------------------------- elements

PbwElement PbwElement::scalar(RelationsPtr r, const RingElement& f) {
  PbwElement p(std::move(r));
  p.add({}, f);
  return p;
}

PbwElement PbwElement::generator(RelationsPtr r, std::size_t i) {
  PbwElement p(r);
  p.add({static_cast<int>(i)}, RingElement(r->ring(), Rational(1)));
  return p;
}

void PbwElement::add(const PbwWord& w, const RingElement& f) {
  if (f.is_zero()) return;
  auto it = terms_.find(w);
  if (it == terms_.end()) {
    terms_.emplace(w, f);
    return;
  }
  it->second += f;
  if (it->second.is_zero()) terms_.erase(it);
}

RingElement PbwElement::coefficient(const PbwWord& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? RingElement(r_->ring()) : it->second;
}

int PbwElement::filtration_degree() const {
  int d = -1;
  for (const auto& [w, f] : terms_) d = std::max(d, static_cast<int>(w.size()));
  return d;
}

PbwElement& PbwElement::operator+=(const PbwElement& b) {
  if (!r_) r_ = b.r_;
  for (const auto& [w, f] : b.terms_) add(w, f);
  return *this;
}

PbwElement& PbwElement::operator-=(const PbwElement& b) {
  if (!r_) r_ = b.r_;
  for (const auto& [w, f] : b.terms_) add(w, -f);
  return *this;
}

PbwElement operator*(const PbwElement& a, const PbwElement& b) {
  const auto& r = a.r_ ? a.r_ : b.r_;
  PbwElement out(r);
  for (const auto& [wa, fa] : a.terms_)
    for (const auto& [wb, fb] : b.terms_) {
      RawWord w{Letter::ring(fa)};
      for (int g : wa) w.push_back(Letter::gen(static_cast<std::size_t>(g)));
      w.push_back(Letter::ring(fb));
      for (int g : wb) w.push_back(Letter::gen(static_cast<std::size_t>(g)));
      out += normal_form(w, r);
    }
  return out;
}

namespace {

std::string word_string(const PbwWord& w, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) s += (k ? "*" : "") + names[static_cast<std::size_t>(w[k])];
  return s;
}

std::string coefficient_term(const RingElement& f, const std::string& word) {
  std::string c = f.to_string();
  if (word.empty()) return c;
  if (c == "1") return word;
  if (c == "-1") return "-" + word;
  if (f.is_monomial()) return c + "*" + word;
  return "(" + c + ")*" + word;
}

std::string join_terms(const std::vector<std::string>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (const auto& t : terms) {
    if (out.empty()) out = t;
    else if (t[0] == '-') out += " - " + t.substr(1);
    else out += " + " + t;
  }
  return out;
}

/// Longer words first, then lexicographic.
std::vector<const std::pair<const PbwWord, RingElement>*> display_order(const std::map<PbwWord, RingElement>& m) {
  std::vector<const std::pair<const PbwWord, RingElement>*> v;
  for (const auto& t : m) v.push_back(&t);
  std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->first.size() > b->first.size(); });
  return v;
}

}  // namespace

std::string PbwElement::to_string() const {
  std::vector<std::string> ts;
  const auto& names = r_->algebroid()->basis_names();
  for (auto* t : display_order(terms_)) ts.push_back(coefficient_term(t->second, word_string(t->first, names)));
  return join_terms(ts);
}

// ---------------------------------------------------------------- rewriting

namespace {

struct RawTerm {
  RingElement coeff;
  RawWord letters;
};

/// Merges ring letters, pulls constants and leading ring letters into the
/// coefficient.  Returns false when the term vanished.
bool tidy(RawTerm& t) {
  RawWord out;
  for (auto& l : t.letters) {
    if (l.generator >= 0) {
      out.push_back(std::move(l));
      continue;
    }
    if (l.value.is_zero()) return false;
    if (l.value.is_constant()) {
      t.coeff *= l.value.constant_term();
      continue;
    }
    if (out.empty()) {
      t.coeff *= l.value;
      continue;
    }
    if (out.back().generator < 0)
      out.back().value *= l.value;
    else
      out.push_back(std::move(l));
  }
  t.letters = std::move(out);
  return !t.coeff.is_zero();
}

std::vector<std::size_t> redexes(const RawWord& w) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p + 1 < w.size(); ++p) {
    if (w[p].generator < 0) continue;
    if (w[p + 1].generator < 0 || w[p + 1].generator < w[p].generator) out.push_back(p);
  }
  return out;
}

RawWord splice(const RawWord& w, std::size_t p, RawWord mid) {
  RawWord out(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p));
  out.insert(out.end(), std::make_move_iterator(mid.begin()), std::make_move_iterator(mid.end()));
  out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(p + 2), w.end());
  return out;
}

/// One rule application at position p.
void rewrite(const RelationSystem& r, const RawTerm& t, std::size_t p, std::vector<RawTerm>& out) {
  const auto& l = *r.algebroid();
  const auto& a = t.letters[p];
  const auto& b = t.letters[p + 1];
  const auto j = static_cast<std::size_t>(a.generator);
  if (b.generator < 0) {
    out.push_back({t.coeff, splice(t.letters, p, {b, a})});
    RingElement da = apply_field(l.anchor_field(j), b.value);
    if (!da.is_zero()) out.push_back({t.coeff, splice(t.letters, p, {Letter::ring(da)})});
    return;
  }
  const auto i = static_cast<std::size_t>(b.generator);
  out.push_back({t.coeff, splice(t.letters, p, {b, a})});
  for (std::size_t k = 0; k < l.rank(); ++k) {
    const auto& c = l.c(j, i, k);
    if (!c.is_zero()) out.push_back({t.coeff, splice(t.letters, p, {Letter::ring(c), Letter::gen(k)})});
  }
  RingElement q = r.twist().value({static_cast<int>(j), static_cast<int>(i)});
  if (!q.is_zero()) out.push_back({t.coeff, splice(t.letters, p, {Letter::ring(q)})});
}

constexpr std::size_t step_limit = 5'000'000;

PbwElement reduce(std::vector<RawTerm> work, const RelationsPtr& r, std::mt19937* rng,
                  std::optional<std::size_t> first_position = std::nullopt) {
  PbwElement out(r);
  std::size_t steps = 0;
  bool forced = first_position.has_value();
  while (!work.empty()) {
    RawTerm t = std::move(work.back());
    work.pop_back();
    if (!forced && !tidy(t)) continue;
    auto rs = redexes(t.letters);
    if (rs.empty()) {
      PbwWord w;
      for (const auto& l : t.letters) w.push_back(l.generator);
      out.add(w, t.coeff);
      continue;
    }
    std::size_t p = rs.front();
    if (forced) {
      p = *first_position;
      forced = false;
    } else if (rng) {
      p = rs[std::uniform_int_distribution<std::size_t>(0, rs.size() - 1)(*rng)];
    }
    if (++steps > step_limit) throw StructuralError("rewriting exceeded the step limit");
    rewrite(*r, t, p, work);
  }
  return out;
}

}  // namespace

PbwElement normal_form(const RawWord& w, const RelationsPtr& r, std::mt19937* rng) {
  for (const auto& l : w)
    if (l.generator >= static_cast<int>(r->rank())) throw StructuralError("generator index out of range");
  return reduce({RawTerm{RingElement(r->ring(), Rational(1)), w}}, r, rng);
}

std::string AmbiguityReport::to_string() const {
  const auto& names = left.relations()->algebroid()->basis_names();
  std::string w;
  for (std::size_t k = 0; k < word.size(); ++k) {
    w += k ? "*" : "";
    w += word[k].generator >= 0 ? names[static_cast<std::size_t>(word[k].generator)] : word[k].value.to_string();
  }
  return "ambiguity on " + w + ": difference " + difference.to_string();
}

std::optional<AmbiguityReport> confluence_check(const RelationsPtr& r) {
  const std::size_t n = r->rank();
  const auto& ring = r->ring();
  auto both = [&](const RawWord& w) -> std::optional<AmbiguityReport> {
    auto one = RingElement(ring, Rational(1));
    auto left = reduce({RawTerm{one, w}}, r, nullptr, 0);
    auto right = reduce({RawTerm{one, w}}, r, nullptr, 1);
    auto diff = right - left;
    if (diff.is_zero()) return std::nullopt;
    return AmbiguityReport{w, left, right, diff};
  };
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < j; ++i)
        if (auto a = both({Letter::gen(k), Letter::gen(j), Letter::gen(i)})) return a;
  std::vector<RingElement> fs;
  for (std::size_t v = 0; v < ring->num_vars(); ++v) {
    fs.push_back(RingElement::variable(ring, v));
    if (ring->is_laurent(v)) fs.push_back(RingElement::variable(ring, v, -1));
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i)
      for (const auto& f : fs)
        if (auto a = both({Letter::gen(j), Letter::gen(i), Letter::ring(f)})) return a;
  return std::nullopt;
}

// ---------------------------------------------------------------- symbols

SymElement gr_symbol(const PbwElement& p) {
  SymElement out;
  const int d = p.filtration_degree();
  for (const auto& [w, f] : p.terms())
    if (static_cast<int>(w.size()) == d) out.emplace(w, f);
  return out;
}

SymElement sym_multiply(const SymElement& a, const SymElement& b) {
  SymElement out;
  for (const auto& [wa, fa] : a)
    for (const auto& [wb, fb] : b) {
      PbwWord w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      std::sort(w.begin(), w.end());
      auto prod = fa * fb;
      auto it = out.find(w);
      if (it == out.end()) {
        if (!prod.is_zero()) out.emplace(w, prod);
      } else {
        it->second += prod;
        if (it->second.is_zero()) out.erase(it);
      }
    }
  return out;
}

std::vector<PbwWord> pbw_monomials(std::size_t n, std::size_t k) {
  std::vector<PbwWord> out;
  if (k == 0) return {PbwWord{}};
  if (n == 0) return out;
  PbwWord w(k, 0);
  while (true) {
    out.push_back(w);
    std::size_t pos = k;
    while (pos > 0 && w[pos - 1] == static_cast<int>(n) - 1) --pos;
    if (pos == 0) break;
    const int v = w[pos - 1] + 1;
    for (std::size_t q = pos - 1; q < k; ++q) w[q] = v;
  }
  return out;
}

std::size_t sym_count(std::size_t n, std::size_t k) {
  if (n == 0) return k == 0 ? 1 : 0;
  // C(n + k - 1, k)
  std::size_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) c = c * (n - 1 + i) / i;
  return c;
}

// ---------------------------------------------------------------- extensions

AlgebroidPtr extension_from_cocycle(const AlgebroidPtr& l, const LForm& q) {
  if (q.owner() != l || q.degree() != 2) throw StructuralError("cocycle must be a 2-form on the algebroid");
  const auto& r = l->base();
  const std::size_t n = l->rank();
  auto anchor = l->anchor_coefficients();
  anchor.emplace_back(r->num_derivations(), RingElement(r));
  auto names = l->basis_names();
  std::string c = "c";
  while (std::find(names.begin(), names.end(), c) != names.end()) c += "'";
  names.push_back(c);
  StructureTable t(r, n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<RingElement> br(n + 1, RingElement(r));
      for (std::size_t k = 0; k < n; ++k) br[k] = l->c(i, j, k);
      br[n] = q.coefficient({static_cast<int>(i), static_cast<int>(j)});
      t.set(i, j, std::move(br));
    }
  return Algebroid::make(r, n + 1, std::move(anchor), std::move(t), std::move(names),
                         l->name().empty() ? "" : l->name() + "_ext");
}

Splitting canonical_splitting(const AlgebroidPtr& lp, std::size_t n) {
  Splitting z;
  for (std::size_t i = 0; i < n; ++i) z.push_back(Section::basis(lp, i));
  return z;
}

Splitting shifted_splitting(const AlgebroidPtr& lp, const LForm& psi) {
  const std::size_t n = lp->rank() - 1;
  auto z = canonical_splitting(lp, n);
  for (std::size_t i = 0; i < n; ++i) z[i].coeffs[n] += psi.coefficient({static_cast<int>(i)});
  return z;
}

LForm cocycle_from_extension(const AlgebroidPtr& lp, std::size_t central, const AlgebroidPtr& l,
                             const Splitting& zeta) {
  const std::size_t n = l->rank();
  if (lp->rank() != n + 1 || central > n) throw StructuralError("extension must have rank n+1 with a central index");
  if (lp->base() != l->base()) throw StructuralError("extension lives on a different ring");
  if (zeta.size() != n) throw StructuralError("splitting needs one section per basis element");
  auto to_lp = [&](std::size_t k) { return k < central ? k : k + 1; };
  if (!field_is_zero(lp->anchor_field(central))) throw StructuralError("central element has a nonzero anchor");
  for (std::size_t k = 0; k <= n; ++k) {
    auto b = basis_bracket(lp, central, k);
    if (!b.is_zero()) throw StructuralError("distinguished element is not central");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (zeta[i].owner != lp) throw StructuralError("splitting sections must live in the extension");
    for (std::size_t k = 0; k < n; ++k) {
      const auto& f = zeta[i].coeffs[to_lp(k)];
      if (!(f == RingElement(l->base(), Rational(k == i ? 1 : 0))))
        throw StructuralError("splitting does not project to the identity");
    }
    if (!(anchor_of(Section::basis(lp, to_lp(i))) == l->anchor_field(i)))
      throw StructuralError("extension anchor differs from the quotient anchor");
  }
  LForm q(l, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      auto b = bracket(zeta[i], zeta[j]);
      RingElement val = b.coeffs[central];
      for (std::size_t k = 0; k < n; ++k) {
        if (!(b.coeffs[to_lp(k)] == l->c(i, j, k))) throw StructuralError("extension bracket does not cover the quotient bracket");
        val -= l->c(i, j, k) * zeta[k].coeffs[central];
      }
      q.add({static_cast<int>(i), static_cast<int>(j)}, val);
    }
  return q;
}

LForm pullback(const LForm& theta, const AlgebroidMorphism& psi) {
  if (theta.owner() != psi.target) throw StructuralError("form does not live on the morphism target");
  LForm out(psi.source, theta.degree());
  for (const auto& t : index_tuples(psi.source->rank(), theta.degree())) {
    std::vector<Section> args;
    for (int i : t) args.push_back(psi.images[static_cast<std::size_t>(i)]);
    out.add(t, evaluate(theta, args));
  }
  return out;
}

// ---------------------------------------------------------------- algebra maps

PbwElement AlgebraMap::operator()(const PbwElement& p) const {
  PbwElement out(target);
  for (const auto& [w, f] : p.terms()) {
    PbwElement term = PbwElement::scalar(target, f);
    for (int g : w) term = term * images[static_cast<std::size_t>(g)];
    out += term;
  }
  return out;
}

PbwElement AlgebraMap::operator()(const RawWord& w) const {
  PbwElement out = PbwElement::scalar(target, RingElement(target->ring(), Rational(1)));
  for (const auto& l : w)
    out = out * (l.generator >= 0 ? images[static_cast<std::size_t>(l.generator)] : PbwElement::scalar(target, l.value));
  return out;
}

std::optional<std::string> AlgebraMap::check_relations() const {
  const auto& src = *source->algebroid();
  const auto& ring = source->ring();
  std::vector<RingElement> fs;
  for (std::size_t v = 0; v < ring->num_vars(); ++v) {
    fs.push_back(RingElement::variable(ring, v));
    if (ring->is_laurent(v)) fs.push_back(RingElement::variable(ring, v, -1));
  }
  for (std::size_t i = 0; i < src.rank(); ++i)
    for (const auto& f : fs) {
      auto sf = PbwElement::scalar(target, f);
      auto lhs = images[i] * sf - sf * images[i];
      auto rhs = PbwElement::scalar(target, apply_field(src.anchor_field(i), f));
      if (!(lhs == rhs))
        return "[" + src.basis_names()[i] + ", " + f.to_string() + "] maps to " + lhs.to_string() + ", expected " +
               rhs.to_string();
    }
  for (std::size_t j = 0; j < src.rank(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      auto lhs = images[j] * images[i] - images[i] * images[j];
      auto rhs = PbwElement::scalar(target, source->twist().value({static_cast<int>(j), static_cast<int>(i)}));
      for (std::size_t k = 0; k < src.rank(); ++k) {
        const auto& c = src.c(j, i, k);
        if (!c.is_zero()) rhs += PbwElement::scalar(target, c) * images[k];
      }
      if (!(lhs == rhs))
        return "[" + src.basis_names()[j] + ", " + src.basis_names()[i] + "] maps to " + lhs.to_string() +
               ", expected " + rhs.to_string();
    }
  return std::nullopt;
}

AlgebraMap pushforward_algebra_map(const AlgebroidMorphism& psi, const RelationsPtr& target) {
  if (psi.target != target->algebroid()) throw StructuralError("relation system lives on a different algebroid");
  if (auto why = psi.check()) throw StructuralError("not an algebroid morphism: " + *why);
  AlgebraMap m;
  m.target = target;
  m.source = build_relations(psi.source, pullback(target->twist(), psi));
  for (const auto& s : psi.images) {
    PbwElement img(target);
    for (std::size_t k = 0; k < s.coeffs.size(); ++k) img.add({static_cast<int>(k)}, s.coeffs[k]);
    m.images.push_back(img);
  }
  return m;
}

AlgebraMap generator_shift(const RelationsPtr& target, const LForm& phi) {
  const auto& l = target->algebroid();
  if (phi.owner() != l || phi.degree() != 1) throw StructuralError("shift must be a 1-form on the algebroid");
  AlgebraMap m;
  m.target = target;
  m.source = build_relations(l, target->twist() + d_L(phi));
  for (std::size_t i = 0; i < l->rank(); ++i)
    m.images.push_back(PbwElement::generator(target, i) +
                       PbwElement::scalar(target, phi.coefficient({static_cast<int>(i)})));
  return m;
}

}  // namespace algebroid

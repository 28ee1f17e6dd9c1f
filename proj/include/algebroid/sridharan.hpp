#pragma once

#include <algebroid/forms.hpp>

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace algebroid {

/// Directed relations of U_Q(L):
///   e_i f   -> f e_i + a(e_i)(f)
///   e_j e_i -> e_i e_j + sum_k c_ji^k e_k + Q(e_j, e_i)      (j > i)
class RelationSystem {
 public:
  const AlgebroidPtr& algebroid() const { return l_; }
  const LForm& twist() const { return q_; }
  const RingPtr& ring() const { return l_->base(); }
  std::size_t rank() const { return l_->rank(); }

 private:
  friend std::shared_ptr<const RelationSystem> build_relations(const AlgebroidPtr&, const LForm&, bool);
  AlgebroidPtr l_;
  LForm q_;
};
using RelationsPtr = std::shared_ptr<const RelationSystem>;

/// Throws StructuralError when Q is not a closed 2-form, unless forced.  The
/// algebroid itself is not required to verify.
RelationsPtr build_relations(const AlgebroidPtr& l, const LForm& q, bool force = false);

/// Ascending generator word (0-based indices).
using PbwWord = std::vector<int>;

/// Sum of coefficient * ascending word, coefficients on the left.
class PbwElement {
 public:
  PbwElement() = default;
  explicit PbwElement(RelationsPtr r) : r_(std::move(r)) {}
  static PbwElement scalar(RelationsPtr r, const RingElement& f);
  static PbwElement generator(RelationsPtr r, std::size_t i);

  const RelationsPtr& relations() const { return r_; }
  const std::map<PbwWord, RingElement>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Adds f * w for an ascending word w.
  void add(const PbwWord& w, const RingElement& f);
  RingElement coefficient(const PbwWord& w) const;
  /// Longest word length, -1 for zero.
  int filtration_degree() const;

  PbwElement& operator+=(const PbwElement& b);
  PbwElement& operator-=(const PbwElement& b);
  friend PbwElement operator+(PbwElement a, const PbwElement& b) { return a += b; }
  friend PbwElement operator-(PbwElement a, const PbwElement& b) { return a -= b; }
  friend PbwElement operator*(const PbwElement& a, const PbwElement& b);
  friend bool operator==(const PbwElement& a, const PbwElement& b) { return a.terms_ == b.terms_; }

  /// "x*e1 + 1", words written as e1*e2; "0" when empty.
  std::string to_string() const;

 private:
  RelationsPtr r_;
  std::map<PbwWord, RingElement> terms_;
};

/// One letter of a raw word: a generator, or a ring element.
struct Letter {
  int generator = -1;  // -1 for a ring element
  RingElement value;
  static Letter gen(std::size_t i) { return Letter{static_cast<int>(i), RingElement()}; }
  static Letter ring(const RingElement& f) { return Letter{-1, f}; }
};
using RawWord = std::vector<Letter>;

/// Leftmost reduction unless `rng` is given, in which case each step picks a
/// random redex.
PbwElement normal_form(const RawWord& w, const RelationsPtr& r, std::mt19937* rng = nullptr);

struct AmbiguityReport {
  RawWord word;  // e_k e_j e_i, or e_j e_i f
  PbwElement left, right, difference;  // difference = right - left
  std::string to_string() const;
};

/// Resolves e_k e_j e_i (k > j > i) and e_j e_i x_v (x_v^{-1} too on Laurent
/// variables) both ways; `left` reduces the leading pair first.  Without a
/// twist the difference on e_k e_j e_i is the Jacobiator of (e_i, e_j, e_k).
std::optional<AmbiguityReport> confluence_check(const RelationsPtr& r);

/// Commutative monomial (ascending multiset) -> coefficient.
using SymElement = std::map<PbwWord, RingElement>;
/// Top filtration part as a commutative polynomial in the generators.
SymElement gr_symbol(const PbwElement& p);
SymElement sym_multiply(const SymElement& a, const SymElement& b);
/// Ascending words of length k in n letters.
std::vector<PbwWord> pbw_monomials(std::size_t n, std::size_t k);
/// Number of degree-k monomials of Sym in n variables.
std::size_t sym_count(std::size_t n, std::size_t k);

/// Rank n+1 algebroid: [e_i, e_j]' = [e_i, e_j] + Q(e_i, e_j) c, with c = basis n central
/// and anchorless.
AlgebroidPtr extension_from_cocycle(const AlgebroidPtr& l, const LForm& q);

/// zeta(e_i) as a section of lp; must project to e_i.
using Splitting = std::vector<Section>;
Splitting canonical_splitting(const AlgebroidPtr& lp, std::size_t n);
/// e_i -> e_i + psi(e_i) c.
Splitting shifted_splitting(const AlgebroidPtr& lp, const LForm& psi);

/// Q(u, v) = c-component of [zeta u, zeta v]' - zeta[u, v].  Throws on an lp
/// that is not an extension of l by the central element `central`.
LForm cocycle_from_extension(const AlgebroidPtr& lp, std::size_t central, const AlgebroidPtr& l,
                             const Splitting& zeta);

/// psi^* of a form along an algebroid morphism.
LForm pullback(const LForm& theta, const AlgebroidMorphism& psi);

/// Algebra map defined on generators: ring elements map to themselves.
struct AlgebraMap {
  RelationsPtr source, target;
  std::vector<PbwElement> images;  // images[i] of e_i, in target

  PbwElement operator()(const PbwElement& p) const;
  /// Image of a raw word, reduced in the target.
  PbwElement operator()(const RawWord& w) const;
  /// The two families of relations hold for the images; description of the
  /// first failure otherwise.
  std::optional<std::string> check_relations() const;
};

/// U_{psi^* Q'}(L) -> U_{Q'}(L') along a morphism.  Throws when psi is not one.
AlgebraMap pushforward_algebra_map(const AlgebroidMorphism& psi, const RelationsPtr& target);

/// e -> e + phi(e) from U_{Q + d phi} to U_Q.
AlgebraMap generator_shift(const RelationsPtr& target, const LForm& phi);

}  // namespace algebroid

#pragma once

#include <algebroid/algebroid.hpp>

#include <map>
#include <string>
#include <vector>

namespace algebroid {

/// Strictly ascending 0-based basis indices.
using IndexTuple = std::vector<int>;

/// Ascending p-element subsets of {0..n-1}, in lexicographic order.
std::vector<IndexTuple> index_tuples(std::size_t n, std::size_t p);

/// Sorts `t` in place; returns the permutation sign, or 0 on a repeated index.
int sort_with_sign(IndexTuple& t);

/// An alternating p-form on the sections of an algebroid, in the dual basis.
class LForm {
 public:
  LForm() = default;
  LForm(AlgebroidPtr owner, std::size_t degree);

  static LForm function(AlgebroidPtr owner, const RingElement& f);
  /// The dual basis element e_i^.
  static LForm dual(AlgebroidPtr owner, std::size_t i);

  const AlgebroidPtr& owner() const { return owner_; }
  std::size_t degree() const { return degree_; }
  const std::map<IndexTuple, RingElement>& coefficients() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  /// Coefficient on an ascending tuple (zero when absent).
  RingElement coefficient(const IndexTuple& t) const;
  /// theta(e_{t_0}, ..., e_{t_{p-1}}) for an arbitrary index list.
  RingElement value(IndexTuple t) const;
  /// Adds f to the coefficient of an arbitrary index list, with the sorting sign.
  void add(IndexTuple t, const RingElement& f);

  LForm& operator+=(const LForm& b);
  LForm& operator-=(const LForm& b);
  friend LForm operator+(LForm a, const LForm& b) { return a += b; }
  friend LForm operator-(LForm a, const LForm& b) { return a -= b; }
  friend LForm operator*(const RingElement& f, const LForm& a);
  friend LForm operator*(const Rational& c, const LForm& a);
  friend bool operator==(const LForm& a, const LForm& b);

  /// Max polynomial degree / Laurent extent of the coefficients.
  int coefficient_degree() const;
  int coefficient_extent() const;

  /// "x*e1^ ^ e2^ + ..." using the owner's basis names.
  std::string to_string() const;

 private:
  void check_owner(const LForm& b) const;
  AlgebroidPtr owner_;
  std::size_t degree_ = 0;
  std::map<IndexTuple, RingElement> coeffs_;
};

/// The algebroid differential; refuses owners that failed verification.
LForm d_L(const LForm& theta);
/// Same formula without the verification guard (used to probe invalid input).
LForm d_L_unchecked(const LForm& theta);

LForm wedge(const LForm& a, const LForm& b);
/// Interior product with u in the first slot.
LForm contract(const LForm& theta, const Section& u);
/// Evaluates a p-form on p sections.
RingElement evaluate(const LForm& theta, const std::vector<Section>& args);

}  // namespace algebroid

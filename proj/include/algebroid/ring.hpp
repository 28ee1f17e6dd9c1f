#pragma once

#include <algebroid/rational.hpp>

#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace algebroid {

using Exponents = std::vector<int>;
using Terms = std::map<Exponents, Rational>;

class ChartRing;
using RingPtr = std::shared_ptr<const ChartRing>;

/// A derivation of a chart ring, determined by its values on the variables.
struct Derivation {
  std::string name;
  std::vector<Terms> images;  // images[v] = D(x_v)
};

/// Multivariate polynomial / Laurent polynomial ring over Q.
///
/// Every variable x gets the coordinate derivation "d/dx"; extra derivations
/// can be declared through the builder.  Laurent variables have no lower
/// exponent bound, polynomial ones are bounded below by 0.
class ChartRing : public std::enable_shared_from_this<ChartRing> {
 public:
  struct Variable {
    std::string name;
    bool laurent = false;
  };

  class Builder {
   public:
    Builder& name(std::string n);
    Builder& variable(std::string name, bool laurent);
    Builder& derivation(std::string name, std::vector<Terms> images);
    RingPtr build() const;

   private:
    std::string name_;
    std::vector<Variable> vars_;
    std::vector<Derivation> extra_;
  };

  static RingPtr polynomial(const std::vector<std::string>& vars, std::string name = "");
  static RingPtr laurent(const std::vector<std::string>& vars, std::string name = "");

  const std::string& name() const { return name_; }
  std::size_t num_vars() const { return vars_.size(); }
  const Variable& variable(std::size_t i) const { return vars_.at(i); }
  const std::string& var_name(std::size_t i) const { return vars_.at(i).name; }
  bool is_laurent(std::size_t i) const { return vars_.at(i).laurent; }
  int lower_bound(std::size_t i) const {
    return vars_.at(i).laurent ? std::numeric_limits<int>::min() : 0;
  }
  bool all_polynomial() const;
  std::optional<std::size_t> index_of(const std::string& var) const;

  std::size_t num_derivations() const { return derivations_.size(); }
  const Derivation& derivation(std::size_t i) const { return derivations_.at(i); }
  std::optional<std::size_t> derivation_index(const std::string& name) const;

  /// True when the exponent vector is admissible in this ring.
  bool admits(const Exponents& e) const;

 private:
  ChartRing() = default;
  std::string name_;
  std::vector<Variable> vars_;
  std::vector<Derivation> derivations_;
};

/// An element of a ChartRing: finitely many nonzero rational terms.
class RingElement {
 public:
  RingElement() = default;
  explicit RingElement(RingPtr ring);
  RingElement(RingPtr ring, const Rational& constant);
  RingElement(RingPtr ring, Terms terms);

  static RingElement variable(const RingPtr& ring, std::size_t i, int power = 1);
  static RingElement monomial(const RingPtr& ring, Exponents e, const Rational& c = 1);

  const RingPtr& ring() const { return ring_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Constant term (coefficient of the zero exponent).
  Rational constant_term() const;
  Rational coefficient(const Exponents& e) const;
  bool is_monomial() const { return terms_.size() == 1; }
  /// Total degree in the polynomial variables; -1 for zero.
  int polynomial_degree() const;
  /// Largest |exponent| over Laurent variables.
  int laurent_extent() const;

  RingElement& operator+=(const RingElement& b);
  RingElement& operator-=(const RingElement& b);
  RingElement& operator*=(const RingElement& b);
  RingElement& operator*=(const Rational& c);
  RingElement operator-() const;
  friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
  friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }
  friend RingElement operator*(const RingElement& a, const RingElement& b);
  friend RingElement operator*(RingElement a, const Rational& c) { return a *= c; }
  friend RingElement operator*(const Rational& c, RingElement a) { return a *= c; }
  friend bool operator==(const RingElement& a, const RingElement& b);

  /// Integer power; negative exponents require a unit (single term in Laurent variables).
  RingElement pow(int n) const;
  /// Inverse of a unit; throws StructuralError otherwise.
  RingElement inverse() const;
  bool is_unit() const;

  RingElement partial(std::size_t var) const;
  RingElement apply(const Derivation& d) const;

  std::string to_string() const;

 private:
  void check_owner(const RingElement& b) const;
  RingPtr ring_;
  Terms terms_;
};

RingElement apply_derivation(const std::string& name, const RingElement& f);
RingElement ring_arith(const RingElement& a, const RingElement& b, char op);

/// A ring homomorphism given by images of the source variables.
class RingMap {
 public:
  RingMap(RingPtr source, RingPtr target, std::vector<RingElement> images);
  static RingMap identity(const RingPtr& ring);

  const RingPtr& source() const { return source_; }
  const RingPtr& target() const { return target_; }
  const std::vector<RingElement>& images() const { return images_; }

  RingElement operator()(const RingElement& f) const;

  /// True when every image is a monomial c*y^a.
  bool is_monomial() const;
  /// For monomial maps with invertible exponent matrix: each target variable
  /// written as c * prod(image_v)^{k_v}.  Returns nullopt when not invertible.
  std::optional<std::vector<std::pair<Rational, std::vector<int>>>> monomial_inverse() const;

 private:
  RingPtr source_, target_;
  std::vector<RingElement> images_;
};

RingElement apply_ring_map(const RingMap& m, const RingElement& f);

}  // namespace algebroid

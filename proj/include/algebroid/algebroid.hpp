#pragma once

#include <algebroid/ring.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace algebroid {

/// A derivation written by its values on the variables of the base ring.
using VectorField = std::vector<RingElement>;

RingElement apply_field(const VectorField& x, const RingElement& f);
VectorField field_commutator(const VectorField& x, const VectorField& y);
bool field_is_zero(const VectorField& x);

class Algebroid;
using AlgebroidPtr = std::shared_ptr<const Algebroid>;

/// Antisymmetric table c_{ij}^k; setting (i,j) also sets (j,i).
class StructureTable {
 public:
  StructureTable() = default;
  StructureTable(const RingPtr& ring, std::size_t rank);

  std::size_t rank() const { return rank_; }
  void set(std::size_t i, std::size_t j, std::vector<RingElement> bracket);
  const RingElement& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return c_[(i * rank_ + j) * rank_ + k];
  }
  bool structure_is_zero() const;

 private:
  std::size_t rank_ = 0;
  std::vector<RingElement> c_;
};

struct AxiomWitness {
  enum class Kind { jacobi_failure, anchor_morphism_failure };
  Kind kind;
  std::vector<std::size_t> indices;  // basis indices involved (0-based)
  std::vector<RingElement> residual;    // Section coefficients or vector-field values
};

/// A Lie-Rinehart structure on a free module of rank n over a chart ring.
///
/// The anchor is stored both by its coefficients in the ring's declared
/// derivations and by its action on the variables, which is what the
/// computations use.  Axioms are checked once at construction; invalid
/// structures are representable and report their witness.
class Algebroid {
 public:
  Algebroid(RingPtr base, std::size_t rank, std::vector<std::vector<RingElement>> anchor_coefficients,
            StructureTable structure, std::vector<std::string> basis_names = {}, std::string name = "");

  static AlgebroidPtr make(RingPtr base, std::size_t rank, std::vector<std::vector<RingElement>> anchor,
                           StructureTable structure, std::vector<std::string> basis_names = {},
                           std::string name = "");

  const RingPtr& base() const { return base_; }
  std::size_t rank() const { return rank_; }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& basis_names() const { return basis_names_; }

  /// Coefficient of a(e_i) on derivation d.
  const RingElement& anchor_coefficient(std::size_t i, std::size_t d) const { return anchor_[i][d]; }
  const std::vector<std::vector<RingElement>>& anchor_coefficients() const { return anchor_; }
  /// a(e_i) as values on the variables.
  const VectorField& anchor_field(std::size_t i) const { return action_[i]; }
  const StructureTable& structure() const { return structure_; }
  const RingElement& c(std::size_t i, std::size_t j, std::size_t k) const { return structure_(i, j, k); }

  bool verified() const { return !witness_.has_value(); }
  const std::optional<AxiomWitness>& witness() const { return witness_; }

  RingElement zero() const { return RingElement(base_); }
  RingElement one() const { return RingElement(base_, Rational(1)); }
  bool anchor_is_zero() const;
  /// Max polynomial degree / Laurent extent over anchor and structure coefficients.
  int coefficient_degree() const;
  int coefficient_extent() const;

 private:
  RingPtr base_;
  std::size_t rank_;
  std::vector<std::vector<RingElement>> anchor_;
  std::vector<VectorField> action_;
  StructureTable structure_;
  std::vector<std::string> basis_names_;
  std::string name_;
  std::optional<AxiomWitness> witness_;
};

struct Section {
  AlgebroidPtr owner;
  std::vector<RingElement> coeffs;

  static Section zero(const AlgebroidPtr& owner);
  static Section basis(const AlgebroidPtr& owner, std::size_t i);

  bool is_zero() const;
  Section& operator+=(const Section& b);
  Section& operator-=(const Section& b);
  friend Section operator+(Section a, const Section& b) { return a += b; }
  friend Section operator-(Section a, const Section& b) { return a -= b; }
  friend Section operator*(const RingElement& f, Section s);
  friend bool operator==(const Section& a, const Section& b);
  std::string to_string() const;
};

Section bracket(const Section& u, const Section& v);
RingElement anchor_apply(const Section& u, const RingElement& f);
VectorField anchor_of(const Section& u);
/// Bracket of basis elements as a section.
Section basis_bracket(const AlgebroidPtr& l, std::size_t i, std::size_t j);

/// Jacobi on all basis triples, anchor compatibility on all basis pairs.
std::optional<AxiomWitness> verify_axioms(const Algebroid& l);
std::string describe(const AxiomWitness& w, const Algebroid& l);

// ---------------------------------------------------------------- catalog

AlgebroidPtr make_tangent(const RingPtr& r);
AlgebroidPtr make_trivial_bundle(const RingPtr& r, std::size_t n);

struct StructureConstant {
  std::size_t i, j, k;
  Rational value;  // [e_i, e_j] contains value * e_k
};
AlgebroidPtr make_lie_algebra_bundle(const RingPtr& r, std::size_t n, const std::vector<StructureConstant>& c);
/// Throws StructuralError when a bracket of generators does not re-expand in them.
AlgebroidPtr make_foliation(const RingPtr& r, const std::vector<VectorField>& generators);
/// Cotangent algebroid of a bivector, pi[i][j] = Pi^{ij} (antisymmetric).
AlgebroidPtr make_poisson(const RingPtr& r, const std::vector<std::vector<RingElement>>& pi);
AlgebroidPtr make_log(const RingPtr& r, const std::vector<std::size_t>& divisor_vars);

/// Sum over cyclic (i,j,k) of Pi^{il} d_l Pi^{jk}; zero iff [Pi,Pi] = 0.
RingElement schouten_component(const RingPtr& r, const std::vector<std::vector<RingElement>>& pi, std::size_t i,
                               std::size_t j, std::size_t k);

/// A base-preserving bundle map; images[i] is the image of source basis e_i.
struct AlgebroidMorphism {
  AlgebroidPtr source, target;
  std::vector<Section> images;

  Section operator()(const Section& u) const;
  /// Returns a description of the first failure, or nullopt for a morphism.
  std::optional<std::string> check() const;
};

AlgebroidMorphism identity_morphism(const AlgebroidPtr& l);

/// Same rank, anchors and structure functions (in the given bases).
bool same_structure(const Algebroid& a, const Algebroid& b);

}  // namespace algebroid

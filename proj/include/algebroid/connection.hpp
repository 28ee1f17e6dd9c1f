#pragma once

#include <algebroid/cohomology.hpp>

#include <optional>
#include <string>
#include <vector>

namespace algebroid {

/// Square matrix over a chart ring, row-major.
using Matrix = std::vector<std::vector<RingElement>>;
/// Coordinates of a module section in the frame s_1..s_r.
using ModuleVector = std::vector<RingElement>;

Matrix zero_matrix(const RingPtr& r, std::size_t n);
Matrix identity_matrix(const RingPtr& r, std::size_t n);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix scale(const RingElement& f, const Matrix& a);
ModuleVector matrix_apply(const Matrix& a, const ModuleVector& v);
RingElement trace(const Matrix& a);
bool is_zero(const Matrix& a);
/// Inverse of a matrix whose determinant is a unit of the ring.
std::optional<Matrix> inverse(const Matrix& a);
std::string to_string(const Matrix& a);

/// A connection on the free module of rank r: nabla_{e_i} s = a(e_i)(s) + A_i s.
class Connection {
 public:
  Connection(AlgebroidPtr l, std::size_t rank, std::vector<Matrix> components);
  /// The trivial connection d (all A_i = 0).
  static Connection trivial(AlgebroidPtr l, std::size_t rank);

  const AlgebroidPtr& algebroid() const { return l_; }
  std::size_t rank() const { return rank_; }
  const Matrix& component(std::size_t i) const { return a_[i]; }
  const std::vector<Matrix>& components() const { return a_; }

  ModuleVector covariant(std::size_t i, const ModuleVector& s) const;
  ModuleVector covariant(const Section& u, const ModuleVector& s) const;

 private:
  AlgebroidPtr l_;
  std::size_t rank_;
  std::vector<Matrix> a_;
};

/// Module-valued p-form: one LForm per frame vector.
struct EValuedForm {
  AlgebroidPtr owner;
  std::size_t rank = 0;
  std::size_t degree = 0;
  std::vector<LForm> parts;  // parts[b] is the s_b component

  static EValuedForm zero(const AlgebroidPtr& l, std::size_t rank, std::size_t degree);
  /// Degree-0 form from a module section.
  static EValuedForm section(const AlgebroidPtr& l, const ModuleVector& s);
  bool is_zero() const;
  friend bool operator==(const EValuedForm& a, const EValuedForm& b);
};

/// F(e_i, e_j) for i < j.
struct CurvatureTensor {
  AlgebroidPtr owner;
  std::size_t rank = 0;
  std::vector<std::vector<Matrix>> entries;  // entries[i][j], antisymmetric

  const Matrix& operator()(std::size_t i, std::size_t j) const { return entries[i][j]; }
  /// F(u, v) for arbitrary sections.
  Matrix evaluate(const Section& u, const Section& v) const;
};

CurvatureTensor curvature(const Connection& c);

struct FlatnessWitness {
  std::size_t i, j, row, col;
  RingElement value;
  std::string to_string(const Algebroid& l) const;
};
/// nullopt when flat.
std::optional<FlatnessWitness> flatness_witness(const Connection& c);
bool is_flat(const Connection& c);

/// nabla(eta (x) s) = d_L eta (x) s + (-1)^k eta ^ nabla s.
EValuedForm extend_connection(const Connection& c, const EValuedForm& omega);

/// tr(F^k) as a 2k-form, k in {1, 2}; asserts closedness.
LForm chern_trace_form(const Connection& c, int k);

struct ObstructionResult {
  enum class Status { consistent, obstructed, obstructed_in_window };
  Status status;
  ExactnessResult exactness;
};

/// F = Q id forces tr F = r Q, which must be exact.
ObstructionResult obstruction_trace_check(const Connection& c, const LForm& q, const TruncationWindow& w,
                                          Exec exec = Exec::parallel);

/// The pulled-back connection along psi: source -> c.algebroid().
Connection pullback(const Connection& c, const AlgebroidMorphism& psi);
/// psi* of a curvature tensor.
CurvatureTensor pullback(const CurvatureTensor& f, const AlgebroidMorphism& psi);

/// Curvature of the explicit connection minus Q id; nullopt when F = Q id.
std::optional<FlatnessWitness> curvature_equals(const Connection& c, const LForm& q);

}  // namespace algebroid

#pragma once

#include <algebroid/connection.hpp>
#include <algebroid/sridharan.hpp>

#include <optional>
#include <string>
#include <vector>

namespace algebroid {

/// Pushes an algebroid along a ring map with invertible Jacobian: anchors are
/// solved from J X' = m(X), structure functions are mapped.
AlgebroidPtr restrict_algebroid(const AlgebroidPtr& l, const RingMap& m);

struct Chart {
  std::string name;
  AlgebroidPtr algebroid;
};

/// Overlap of charts a < b.  Algebroid and forms on it use chart a's frame;
/// e^b_i = sum_j transition[i][j] e^a_j.  An optional line bundle glues
/// coordinates by u^(a) = bundle * u^(b).
struct Overlap {
  std::size_t a = 0, b = 0;
  RingPtr ring;
  RingMap from_a, from_b;
  AlgebroidPtr algebroid;
  Matrix transition, transition_inverse;
  std::optional<RingElement> bundle;
};

/// Triple overlap a < b < c with maps from the rings of (a,b), (b,c), (a,c).
struct TripleOverlap {
  std::size_t a = 0, b = 0, c = 0;
  RingPtr ring;
  RingMap from_ab, from_bc, from_ac;
  AlgebroidPtr algebroid;  // chart a's frame
};

enum class CoverModel { general, p1_tangent, p1_log };

class Cover {
 public:
  std::string name;
  CoverModel model = CoverModel::general;
  std::optional<int> twist;  // k of O(k) on the P^1 models

  std::size_t add_chart(std::string chart_name, AlgebroidPtr l);
  /// Restricts both charts, checks that the transition identifies the
  /// structures, and stores the overlap.  Throws StructuralError otherwise.
  std::size_t add_overlap(std::size_t a, std::size_t b, RingPtr ring, RingMap from_a, RingMap from_b,
                          Matrix transition, std::optional<RingElement> bundle = std::nullopt);
  std::size_t add_triple(std::size_t a, std::size_t b, std::size_t c, RingPtr ring, RingMap from_ab, RingMap from_bc,
                         RingMap from_ac);

  const std::vector<Chart>& charts() const { return charts_; }
  const std::vector<Overlap>& overlaps() const { return overlaps_; }
  const std::vector<TripleOverlap>& triples() const { return triples_; }
  std::optional<std::size_t> overlap_index(std::size_t a, std::size_t b) const;
  bool has_bundle() const;

 private:
  std::vector<Chart> charts_;
  std::vector<Overlap> overlaps_;
  std::vector<TripleOverlap> triples_;
};

enum class P1Algebroid { tangent, log };

/// Q[z], Q[w], overlap Q[z,1/z] with w -> 1/z.  With k, the bundle O(k):
/// u^(0) = z^k u^(1).
Cover make_p1_cover(P1Algebroid kind, std::optional<int> k = std::nullopt);
/// One chart, no overlaps.
Cover make_single_chart_cover(const AlgebroidPtr& l, std::string name = "U");
/// `copies` charts carrying the same algebroid, glued by identities, with all
/// triple overlaps.
Cover make_identity_cover(const AlgebroidPtr& l, std::size_t copies);

/// Restriction of a form on chart `chart` to overlap `o`, in chart a's frame.
LForm restrict_form(const Cover& c, std::size_t o, std::size_t chart, const LForm& theta);

/// phi per overlap (1-forms on the overlap algebroid), Q per chart.  An absent
/// Q means zero and was not supplied.
struct CechPair {
  std::vector<LForm> phi;
  std::vector<std::optional<LForm>> q;

  static CechPair zero(const Cover& c);
  LForm q_at(const Cover& c, std::size_t chart) const;
};

struct CocycleReport {
  enum class Status { verified, degenerate_verified, failed };
  Status status = Status::verified;
  std::string equation;  // "d_L Q = 0", "d_L phi = Q_b - Q_a", "delta phi = 0"
  std::string location;  // chart or overlap name
  std::string residual;
  std::string to_string() const;
};

CocycleReport verify_cocycle(const Cover& c, const CechPair& p);

/// A functional vanishing on every Cech coboundary and nonzero on p1 - p2.
struct CechResidue {
  std::size_t overlap = 0;
  Rational value;
  std::string to_string() const;  // "res = 1"
};

struct CoboundaryReport {
  enum class Status { equivalent, inequivalent, inequivalent_in_window };
  Status status = Status::inequivalent_in_window;
  std::vector<LForm> eta;  // per chart, when equivalent: p2 - p1 = (delta eta, d_L eta)
  std::optional<CechResidue> residue;
  TruncationWindow window;
};

/// Throws when either pair fails verify_cocycle.
CoboundaryReport coboundary_test(const Cover& c, const CechPair& p1, const CechPair& p2, const TruncationWindow& w,
                                 Exec exec = Exec::parallel);

/// phi_ab = g^{-1} d_L g from the cover's line bundle, Q absent.
CechPair atiyah_cocycle(const Cover& c);

struct GluingMap {
  std::size_t overlap = 0;
  AlgebraMap map;  // U_{Q_b} -> U_{Q_a} on the overlap, e -> e + phi_ab(e)
};

struct GluingReport {
  std::vector<GluingMap> maps;
  std::optional<std::string> failure;  // first relation or triple-overlap failure
};

GluingReport glue_sridharan(const Cover& c, const CechPair& p);

/// Local connections of one rank; transitions[o] glues coordinates by
/// u^(a) = G u^(b) on overlap o.
struct LocalConnectionBunch {
  std::size_t rank = 0;
  std::vector<Connection> connections;
  std::vector<Matrix> transitions;

  /// Rank 1 bunch on the cover's line bundle (identity where absent).
  static LocalConnectionBunch line_bundle(const Cover& c, std::vector<Connection> connections);
};

struct LambdaWitness {
  enum class Kind { module_axiom, overlap, transition_cocycle };
  Kind kind = Kind::module_axiom;
  std::string location;
  std::string detail;
  std::string to_string() const;
};

/// Per chart: nabla_j nabla_i - nabla_i nabla_j - nabla_{[e_j,e_i]} = Q(e_j,e_i)
/// and [nabla_i, f] = a(e_i)(f), both on frame vectors.  Per overlap:
/// A_b = G^{-1} A_a G + G^{-1} d_L G + phi_ab id in chart a's frame.
std::optional<LambdaWitness> verify_lambda_module(const Cover& c, const CechPair& p, const LocalConnectionBunch& b);

/// Line bundle connections d + eta_a from a coboundary solution of the Atiyah pair.
LocalConnectionBunch connection_from_coboundary(const Cover& c, const std::vector<LForm>& eta);

struct LineBundleDims {
  int k = 0;
  int window = 0;
  std::size_t h0 = 0, h1 = 0;
  bool stable = false;
};

/// h^0, h^1 of O(k) on the P^1 cover by elimination of the Cech differential
/// on Laurent exponents in [-W, W].  Requires W > |k|.
LineBundleDims line_bundle_cohomology(int k, int window, Exec exec = Exec::parallel);
/// Same numbers by counting exponents that are common / missed.
LineBundleDims line_bundle_cohomology_by_counting(int k, int window);

}  // namespace algebroid

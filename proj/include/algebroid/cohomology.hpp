#pragma once

#include <algebroid/forms.hpp>
#include <algebroid/kernels.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace algebroid {

/// Finite slice of an infinite cochain complex: polynomial total degree <= degree,
/// each Laurent exponent in [-extent, extent].
struct TruncationWindow {
  int degree = 8;
  int extent = 12;

  TruncationWindow enlarged(int by) const { return {degree + by, extent + by}; }
  std::string to_string() const;
  friend bool operator==(const TruncationWindow&, const TruncationWindow&) = default;
};

/// The default window, overridden by ADF_WINDOW ("D" or "D,W").
TruncationWindow default_window();
void validate_window(const TruncationWindow& w);

/// Monomials of a ring inside a window, in descending lexicographic order.
std::vector<Exponents> window_monomials(const RingPtr& r, const TruncationWindow& w);
bool in_window(const RingPtr& r, const Exponents& e, const TruncationWindow& w);

/// A basis element of a windowed cochain space: monomial times index tuple.
struct SliceKey {
  Exponents exps;
  IndexTuple indices;
  friend auto operator<=>(const SliceKey&, const SliceKey&) = default;
};

using Cochain = std::map<SliceKey, Rational>;

/// A cochain complex of free modules over a chart ring, described by the index
/// tuples spanning each degree and the differential on monomial generators.
struct WindowedComplex {
  RingPtr ring;
  std::function<std::vector<IndexTuple>(int)> tuples;
  std::function<Cochain(int, const SliceKey&)> differential;
  int coefficient_degree = 0;
  int coefficient_extent = 0;
};

/// The complex of L-forms with d_L.
WindowedComplex form_complex(const AlgebroidPtr& l);

/// Converts between forms and cochains.
Cochain to_cochain(const LForm& a);
LForm from_cochain(const AlgebroidPtr& l, std::size_t degree, const Cochain& c);

struct DegreeDims {
  int degree = 0;
  std::size_t cochains = 0;
  std::size_t cocycles = 0;
  std::size_t coboundaries = 0;
  std::size_t cohomology = 0;
};

struct CohomologyReport {
  std::vector<DegreeDims> dims;
  TruncationWindow window;
  bool stable = false;  // same dims in the window enlarged by 2
};

/// Dimensions within the window.  Coboundaries are images of the enlarged
/// (by one) window that land back in the slice.
std::vector<DegreeDims> windowed_dims(const WindowedComplex& c, const std::vector<int>& degrees,
                                      const TruncationWindow& w, Exec exec = Exec::parallel);
CohomologyReport windowed_cohomology(const WindowedComplex& c, const std::vector<int>& degrees,
                                     const TruncationWindow& w, Exec exec = Exec::parallel);

CohomologyReport truncated_cohomology(const AlgebroidPtr& l, const std::vector<int>& degrees,
                                      const TruncationWindow& w, Exec exec = Exec::parallel);

/// A coefficient functional vanishing on every coboundary, nonzero on the input.
struct ResidueCertificate {
  IndexTuple indices;
  Exponents exps;
  Rational value;
  std::string to_string(const Algebroid& l) const;
};

struct ExactnessResult {
  enum class Status { primitive, no_primitive_in_window, obstructed };
  Status status = Status::no_primitive_in_window;
  std::optional<LForm> primitive;
  std::optional<ResidueCertificate> residue;
  TruncationWindow window;
};

/// Solves d_L(x) = theta for x in the window enlarged by one.  Throws when
/// theta is not closed.  A residue certificate upgrades a negative answer to
/// an exact obstruction when it applies.
ExactnessResult exactness_solve(const LForm& theta, const TruncationWindow& w, Exec exec = Exec::parallel);

/// Residue functional for top-degree forms on algebroids whose basis acts
/// diagonally as c * x_i^{m} d/dx_i (m in {0,1}).  nullopt when not applicable
/// or when theta pairs to zero.
std::optional<ResidueCertificate> top_degree_residue(const LForm& theta);

/// Solves the windowed linear system differential(x) = target in degree p-1
/// of the complex.  nullopt when no solution exists in the window.
std::optional<Cochain> windowed_primitive(const WindowedComplex& c, int p, const Cochain& target,
                                          const TruncationWindow& w, Exec exec = Exec::parallel);

}  // namespace algebroid

#pragma once

#include <algebroid/connection.hpp>

#include <optional>
#include <string>
#include <vector>

namespace algebroid {

/// Two algebroids over one base, each acting on the other's module of sections.
struct MatchedPairData {
  AlgebroidPtr l1, l2;
  Connection action12;  // L1 acting on the sections of L2
  Connection action21;  // L2 acting on the sections of L1
  std::string name;
};

/// The mixed-bracket actions read off a direct-sum decomposition of one algebroid:
/// basis 0..n1-1 spans L1, the rest spans L2, and both must close under the bracket.
MatchedPairData matched_from_decomposition(const AlgebroidPtr& l, std::size_t n1, std::string name = "");

// Identity 1: [a1(e), a2(f)] = a2(nabla_e f) - a1(nabla_f e).
// Identity 2: nabla_e [f, g] = [nabla_e f, g] + [f, nabla_e g] + nabla_{nabla_g e} f - nabla_{nabla_f e} g.
// Identity 3: the same with the roles of L1 and L2 swapped.
struct MatchedWitness {
  int equation = 0;                  // 1, 2 or 3
  std::vector<std::size_t> indices;  // (i, b), (i, b, c) or (b, i, j)
  std::vector<RingElement> residual;  // vector field (identity 1) or section coefficients
  std::string to_string(const MatchedPairData& m) const;
};

/// nullopt when all three identities hold on basis sections.  Throws
/// StructuralError naming the action when one of them is not flat.
std::optional<MatchedWitness> verify_matched(const MatchedPairData& m);

/// L1 |x| L2 with basis (L1 basis, L2 basis).  Refuses unmatched data unless forced.
AlgebroidPtr twilled_sum(const MatchedPairData& m, bool force = false);

/// Forms on twilled_sum(m) split by bidegree; these act on them.
/// d1 raises the L1 degree, d2 the L2 degree, neither carries a Koszul sign.
LForm d1_plain(const MatchedPairData& m, const AlgebroidPtr& twilled, const LForm& theta);
LForm d2_plain(const MatchedPairData& m, const AlgebroidPtr& twilled, const LForm& theta);

/// Exposed differentials of the double complex on K^{p,q}: d1 = d1_plain,
/// d2 = (-1)^{p(p-1)/2} d2_plain, so that d1 d2 = (-1)^p d2 d1.
struct DoubleComplex {
  MatchedPairData data;
  AlgebroidPtr twilled;  // force-built, used only as the index carrier

  explicit DoubleComplex(MatchedPairData m);
  std::size_t n1() const { return data.l1->rank(); }
  std::size_t n2() const { return data.l2->rank(); }
  /// Ascending tuples for bidegree (p, q); empty when p or q exceeds the rank.
  std::vector<IndexTuple> tuples(int p, int q) const;
  LForm d1(const LForm& theta) const;
  LForm d2(const LForm& theta) const;
  /// d1 + (-1)^p d2_plain, the differential of the total complex.
  LForm total(const LForm& theta) const;
};

/// Windowed basis of K^{p,q} and the images of both differentials.
struct DoubleComplexSlice {
  int p = 0, q = 0;
  TruncationWindow window;
  std::vector<SliceKey> basis;
  std::vector<Cochain> d1_columns, d2_columns;
};

DoubleComplexSlice build_slice(const DoubleComplex& k, int p, int q, const TruncationWindow& w,
                               Exec exec = Exec::parallel);

struct CommutationFailure {
  enum class Kind { d1_squared, d2_squared, commutation };
  Kind kind;
  int p = 0, q = 0;
  SliceKey key;
  Cochain residual;
};

/// Checks d1^2 = 0, d2^2 = 0 and d1 d2 = (-1)^p d2 d1 on every slice with p + q <= max_total.
std::optional<CommutationFailure> commutation_check(const DoubleComplex& k, int max_total, const TruncationWindow& w,
                                                    Exec exec = Exec::parallel);

/// The total complex of K as a windowed complex.
WindowedComplex total_complex(const DoubleComplex& k);

struct TotalComparison {
  CohomologyReport total;
  CohomologyReport twilled;
  bool agree = false;
};

TotalComparison total_cohomology_compare(const MatchedPairData& m, const std::vector<int>& degrees,
                                         const TruncationWindow& w, Exec exec = Exec::parallel);

}  // namespace algebroid

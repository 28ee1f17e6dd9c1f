#include <algebroid/matched_pair.hpp>

#include <sstream>

namespace algebroid {

namespace {

ModuleVector unit(const RingPtr& r, std::size_t n, std::size_t i) {
  ModuleVector v(n, RingElement(r));
  v[i] = RingElement(r, Rational(1));
  return v;
}

Section as_section(const AlgebroidPtr& l, const ModuleVector& v) { return Section{l, v}; }

/// nabla_{w} s for a section w of the acting algebroid (tensorial in w).
ModuleVector act(const Connection& c, const Section& w, const ModuleVector& s) { return c.covariant(w, s); }

void check_shape(const MatchedPairData& m) {
  if (!m.l1 || !m.l2) throw StructuralError("matched pair needs two algebroids");
  if (m.l1->base() != m.l2->base()) throw StructuralError("matched pair algebroids live on different rings");
  if (m.action12.algebroid() != m.l1 || m.action12.rank() != m.l2->rank())
    throw StructuralError("action12 must be an L1-connection on the sections of L2");
  if (m.action21.algebroid() != m.l2 || m.action21.rank() != m.l1->rank())
    throw StructuralError("action21 must be an L2-connection on the sections of L1");
}

}  // namespace

MatchedPairData matched_from_decomposition(const AlgebroidPtr& l, std::size_t n1, std::string name) {
  const std::size_t n = l->rank();
  if (n1 > n) throw StructuralError("decomposition index exceeds the rank");
  const std::size_t n2 = n - n1;
  const auto& r = l->base();
  auto sub = [&](std::size_t off, std::size_t len) {
    std::vector<std::vector<RingElement>> anchor;
    std::vector<std::string> names;
    StructureTable t(r, len);
    for (std::size_t i = 0; i < len; ++i) {
      anchor.push_back(l->anchor_coefficients()[off + i]);
      names.push_back(l->basis_names()[off + i]);
      for (std::size_t j = i + 1; j < len; ++j) {
        std::vector<RingElement> br(len, RingElement(r));
        for (std::size_t k = 0; k < n; ++k) {
          const auto& c = l->c(off + i, off + j, k);
          if (k >= off && k < off + len)
            br[k - off] = c;
          else if (!c.is_zero())
            throw StructuralError("summand is not closed under the bracket");
        }
        t.set(i, j, std::move(br));
      }
    }
    return Algebroid::make(r, len, std::move(anchor), std::move(t), std::move(names));
  };
  auto l1 = sub(0, n1);
  auto l2 = sub(n1, n2);
  std::vector<Matrix> a12(n1, zero_matrix(r, n2));
  std::vector<Matrix> a21(n2, zero_matrix(r, n1));
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t b = 0; b < n2; ++b) {
      for (std::size_t g = 0; g < n2; ++g) a12[i][g][b] = l->c(i, n1 + b, n1 + g);
      for (std::size_t k = 0; k < n1; ++k) a21[b][k][i] = l->c(n1 + b, i, k);
    }
  return MatchedPairData{l1, l2, Connection(l1, n2, std::move(a12)), Connection(l2, n1, std::move(a21)),
                         std::move(name)};
}

std::string MatchedWitness::to_string(const MatchedPairData& m) const {
  std::ostringstream os;
  os << "equation " << equation << " fails on (";
  auto name1 = [&](std::size_t i) { return m.l1->basis_names()[i]; };
  auto name2 = [&](std::size_t i) { return m.l2->basis_names()[i]; };
  if (equation == 1)
    os << name1(indices[0]) << "," << name2(indices[1]);
  else if (equation == 2)
    os << name1(indices[0]) << "," << name2(indices[1]) << "," << name2(indices[2]);
  else
    os << name2(indices[0]) << "," << name1(indices[1]) << "," << name1(indices[2]);
  os << "): residual ";
  if (equation == 1) {
    const auto& r = m.l1->base();
    bool first = true;
    for (std::size_t v = 0; v < residual.size(); ++v) {
      if (residual[v].is_zero()) continue;
      os << (first ? "" : " + ") << "(" << residual[v].to_string() << ")*d/d" << r->var_name(v);
      first = false;
    }
  } else {
    os << as_section(equation == 2 ? m.l2 : m.l1, residual).to_string();
  }
  return os.str();
}

std::optional<MatchedWitness> verify_matched(const MatchedPairData& m) {
  check_shape(m);
  if (auto w = flatness_witness(m.action12))
    throw StructuralError("action of L1 on L2 is not flat: " + w->to_string(*m.l1));
  if (auto w = flatness_witness(m.action21))
    throw StructuralError("action of L2 on L1 is not flat: " + w->to_string(*m.l2));
  const auto& r = m.l1->base();
  const std::size_t n1 = m.l1->rank(), n2 = m.l2->rank();
  auto e = [&](std::size_t i) { return unit(r, n1, i); };
  auto f = [&](std::size_t b) { return unit(r, n2, b); };

  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t b = 0; b < n2; ++b) {
      VectorField res = field_commutator(m.l1->anchor_field(i), m.l2->anchor_field(b));
      VectorField p1 = anchor_of(as_section(m.l1, m.action21.covariant(b, e(i))));
      VectorField p2 = anchor_of(as_section(m.l2, m.action12.covariant(i, f(b))));
      for (std::size_t v = 0; v < res.size(); ++v) res[v] += p1[v] - p2[v];
      if (!field_is_zero(res)) return MatchedWitness{1, {i, b}, res};
    }

  // identities 2 and 3 share a shape; `a` acts on the sections of `l`.
  auto derivation_eq = [&](const AlgebroidPtr& l, const Connection& a, const Connection& back, std::size_t i,
                           std::size_t b, std::size_t c) {
    const std::size_t n = l->rank();
    auto ub = as_section(l, unit(r, n, b)), uc = as_section(l, unit(r, n, c));
    auto nb = as_section(l, a.covariant(i, ub.coeffs));
    auto nc = as_section(l, a.covariant(i, uc.coeffs));
    auto lhs = as_section(l, a.covariant(i, bracket(ub, uc).coeffs));
    auto rhs = bracket(nb, uc) + bracket(ub, nc);
    const std::size_t na = a.algebroid()->rank();
    auto wb = as_section(a.algebroid(), back.covariant(b, unit(r, na, i)));
    auto wc = as_section(a.algebroid(), back.covariant(c, unit(r, na, i)));
    rhs += as_section(l, act(a, wc, ub.coeffs));
    rhs -= as_section(l, act(a, wb, uc.coeffs));
    return lhs - rhs;
  };
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t b = 0; b < n2; ++b)
      for (std::size_t c = b + 1; c < n2; ++c) {
        auto res = derivation_eq(m.l2, m.action12, m.action21, i, b, c);
        if (!res.is_zero()) return MatchedWitness{2, {i, b, c}, res.coeffs};
      }
  for (std::size_t b = 0; b < n2; ++b)
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = i + 1; j < n1; ++j) {
        auto res = derivation_eq(m.l1, m.action21, m.action12, b, i, j);
        if (!res.is_zero()) return MatchedWitness{3, {b, i, j}, res.coeffs};
      }
  return std::nullopt;
}

AlgebroidPtr twilled_sum(const MatchedPairData& m, bool force) {
  check_shape(m);
  if (!force) {
    if (auto w = verify_matched(m)) throw StructuralError("not a matched pair: " + w->to_string(m));
  }
  const auto& r = m.l1->base();
  const std::size_t n1 = m.l1->rank(), n2 = m.l2->rank(), n = n1 + n2;
  std::vector<std::vector<RingElement>> anchor;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n1; ++i) {
    anchor.push_back(m.l1->anchor_coefficients()[i]);
    names.push_back(m.l1->basis_names()[i]);
  }
  for (std::size_t b = 0; b < n2; ++b) {
    anchor.push_back(m.l2->anchor_coefficients()[b]);
    names.push_back(m.l2->basis_names()[b]);
  }
  bool clash = false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) clash = clash || names[i] == names[j];
  if (clash) {
    names.clear();
    for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i + 1));
  }

  StructureTable t(r, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<RingElement> br(n, RingElement(r));
      if (j < n1) {
        for (std::size_t k = 0; k < n1; ++k) br[k] = m.l1->c(i, j, k);
      } else if (i >= n1) {
        for (std::size_t k = 0; k < n2; ++k) br[n1 + k] = m.l2->c(i - n1, j - n1, k);
      } else {
        // {e_i, f_b} = nabla_{e_i} f_b - nabla_{f_b} e_i
        const std::size_t b = j - n1;
        for (std::size_t g = 0; g < n2; ++g) br[n1 + g] = m.action12.component(i)[g][b];
        for (std::size_t k = 0; k < n1; ++k) br[k] = -m.action21.component(b)[k][i];
      }
      t.set(i, j, std::move(br));
    }
  std::string name = m.name.empty() ? "" : m.name + "_twilled";
  return Algebroid::make(r, n, std::move(anchor), std::move(t), std::move(names), std::move(name));
}

namespace {

/// Output tuples split into the L1 part and the local L2 part.
void split(const IndexTuple& t, std::size_t n1, IndexTuple& a, IndexTuple& b) {
  a.clear();
  b.clear();
  for (int x : t) {
    if (static_cast<std::size_t>(x) < n1)
      a.push_back(x);
    else
      b.push_back(x - static_cast<int>(n1));
  }
}

IndexTuple join(const IndexTuple& a, const IndexTuple& b, std::size_t n1) {
  IndexTuple t = a;
  for (int x : b) t.push_back(x + static_cast<int>(n1));
  return t;
}

IndexTuple drop(const IndexTuple& t, std::size_t a) {
  IndexTuple out;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (k != a) out.push_back(t[k]);
  return out;
}

IndexTuple drop2(const IndexTuple& t, std::size_t a, std::size_t b) {
  IndexTuple out;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (k != a && k != b) out.push_back(t[k]);
  return out;
}

/// The differential of `acting` with values in forms on the other summand.
/// `first` says whether `acting` owns the leading half of each tuple.
LForm plain_differential(const AlgebroidPtr& acting, const Connection& action, const AlgebroidPtr& twilled,
                         std::size_t n1, bool first, const LForm& theta) {
  const auto& r = twilled->base();
  LForm out(twilled, theta.degree() + 1);
  if (theta.is_zero()) return out;
  const std::size_t other_rank = action.rank();
  auto eval = [&](const IndexTuple& own, const IndexTuple& other) {
    return first ? theta.value(join(own, other, n1)) : theta.value(join(other, own, n1));
  };
  IndexTuple a, b;
  for (const auto& t : index_tuples(twilled->rank(), theta.degree() + 1)) {
    split(t, n1, a, b);
    const IndexTuple& own = first ? a : b;
    const IndexTuple& other = first ? b : a;
    if (own.empty()) continue;
    RingElement val(r);
    for (std::size_t x = 0; x < own.size(); ++x) {
      const auto i = static_cast<std::size_t>(own[x]);
      const IndexTuple rest = drop(own, x);
      RingElement term = apply_field(acting->anchor_field(i), eval(rest, other));
      const Matrix& mat = action.component(i);
      for (std::size_t y = 0; y < other.size(); ++y)
        for (std::size_t g = 0; g < other_rank; ++g) {
          const auto& coef = mat[g][static_cast<std::size_t>(other[y])];
          if (coef.is_zero()) continue;
          IndexTuple moved = other;
          moved[y] = static_cast<int>(g);
          term -= coef * eval(rest, moved);
        }
      if (x % 2) val -= term;
      else val += term;
    }
    for (std::size_t x = 0; x < own.size(); ++x)
      for (std::size_t y = x + 1; y < own.size(); ++y) {
        const IndexTuple rest = drop2(own, x, y);
        RingElement term(r);
        for (std::size_t k = 0; k < acting->rank(); ++k) {
          const auto& c = acting->c(static_cast<std::size_t>(own[x]), static_cast<std::size_t>(own[y]), k);
          if (c.is_zero()) continue;
          IndexTuple front{static_cast<int>(k)};
          front.insert(front.end(), rest.begin(), rest.end());
          term += c * eval(front, other);
        }
        if ((x + y) % 2) val -= term;
        else val += term;
      }
    if (!val.is_zero()) out.add(t, val);
  }
  return out;
}

int count_first(const IndexTuple& t, std::size_t n1) {
  int p = 0;
  for (int x : t) p += static_cast<std::size_t>(x) < n1;
  return p;
}

/// Multiplies each coefficient by sign(p) where p is its L1 degree.
LForm sign_by_p(const LForm& theta, std::size_t n1, int (*sign)(int)) {
  LForm out(theta.owner(), theta.degree());
  for (const auto& [t, f] : theta.coefficients()) out.add(t, sign(count_first(t, n1)) > 0 ? f : -f);
  return out;
}

int koszul(int p) { return (p * (p - 1) / 2) % 2 ? -1 : 1; }
int alternating(int p) { return p % 2 ? -1 : 1; }

}  // namespace

LForm d1_plain(const MatchedPairData& m, const AlgebroidPtr& twilled, const LForm& theta) {
  return plain_differential(m.l1, m.action12, twilled, m.l1->rank(), true, theta);
}

LForm d2_plain(const MatchedPairData& m, const AlgebroidPtr& twilled, const LForm& theta) {
  return plain_differential(m.l2, m.action21, twilled, m.l1->rank(), false, theta);
}

DoubleComplex::DoubleComplex(MatchedPairData m) : data(std::move(m)), twilled(twilled_sum(data, true)) {}

std::vector<IndexTuple> DoubleComplex::tuples(int p, int q) const {
  if (p < 0 || q < 0 || static_cast<std::size_t>(p) > n1() || static_cast<std::size_t>(q) > n2()) return {};
  std::vector<IndexTuple> out;
  for (const auto& a : index_tuples(n1(), static_cast<std::size_t>(p)))
    for (const auto& b : index_tuples(n2(), static_cast<std::size_t>(q))) out.push_back(join(a, b, n1()));
  return out;
}

LForm DoubleComplex::d1(const LForm& theta) const { return d1_plain(data, twilled, theta); }

LForm DoubleComplex::d2(const LForm& theta) const {
  return sign_by_p(d2_plain(data, twilled, theta), n1(), koszul);
}

LForm DoubleComplex::total(const LForm& theta) const {
  return d1(theta) + sign_by_p(d2_plain(data, twilled, theta), n1(), alternating);
}

DoubleComplexSlice build_slice(const DoubleComplex& k, int p, int q, const TruncationWindow& w, Exec exec) {
  DoubleComplexSlice s;
  s.p = p;
  s.q = q;
  s.window = w;
  const auto& r = k.twilled->base();
  for (const auto& mono : window_monomials(r, w))
    for (const auto& t : k.tuples(p, q)) s.basis.push_back(SliceKey{mono, t});
  auto form = [&](const SliceKey& key) {
    LForm a(k.twilled, key.indices.size());
    a.add(key.indices, RingElement::monomial(r, key.exps));
    return a;
  };
  s.d1_columns = kernels::map_indices<Cochain>(
      s.basis.size(), [&](std::size_t j) { return to_cochain(k.d1(form(s.basis[j]))); }, exec);
  s.d2_columns = kernels::map_indices<Cochain>(
      s.basis.size(), [&](std::size_t j) { return to_cochain(k.d2(form(s.basis[j]))); }, exec);
  return s;
}

std::optional<CommutationFailure> commutation_check(const DoubleComplex& k, int max_total, const TruncationWindow& w,
                                                    Exec exec) {
  for (int tot = 0; tot <= max_total; ++tot)
    for (int p = 0; p <= tot; ++p) {
      const int q = tot - p;
      if (k.tuples(p, q).empty()) continue;
      const auto slice = build_slice(k, p, q, w, exec);
      using Kind = CommutationFailure::Kind;
      auto results = kernels::map_indices<std::optional<CommutationFailure>>(
          slice.basis.size(),
          [&](std::size_t j) -> std::optional<CommutationFailure> {
            const auto& key = slice.basis[j];
            const auto a = from_cochain(k.twilled, key.indices.size() + 1, slice.d1_columns[j]);
            const auto b = from_cochain(k.twilled, key.indices.size() + 1, slice.d2_columns[j]);
            auto dd1 = k.d1(a);
            if (!dd1.is_zero()) return CommutationFailure{Kind::d1_squared, p, q, key, to_cochain(dd1)};
            auto dd2 = k.d2(b);
            if (!dd2.is_zero()) return CommutationFailure{Kind::d2_squared, p, q, key, to_cochain(dd2)};
            auto lhs = k.d1(b);
            auto rhs = k.d2(a);
            auto diff = p % 2 ? lhs + rhs : lhs - rhs;
            if (!diff.is_zero()) return CommutationFailure{Kind::commutation, p, q, key, to_cochain(diff)};
            return std::nullopt;
          },
          exec);
      for (auto& res : results)
        if (res) return res;
    }
  return std::nullopt;
}

WindowedComplex total_complex(const DoubleComplex& k) {
  WindowedComplex c;
  c.ring = k.twilled->base();
  c.tuples = [n = k.twilled->rank()](int p) {
    return p < 0 ? std::vector<IndexTuple>{} : index_tuples(n, static_cast<std::size_t>(p));
  };
  auto carrier = std::make_shared<DoubleComplex>(k);
  c.differential = [carrier](int p, const SliceKey& key) {
    LForm a(carrier->twilled, static_cast<std::size_t>(p));
    a.add(key.indices, RingElement::monomial(carrier->twilled->base(), key.exps));
    return to_cochain(carrier->total(a));
  };
  c.coefficient_degree = k.twilled->coefficient_degree();
  c.coefficient_extent = k.twilled->coefficient_extent();
  return c;
}

TotalComparison total_cohomology_compare(const MatchedPairData& m, const std::vector<int>& degrees,
                                         const TruncationWindow& w, Exec exec) {
  if (auto wit = verify_matched(m)) throw StructuralError("not a matched pair: " + wit->to_string(m));
  DoubleComplex k(m);
  TotalComparison out;
  out.total = windowed_cohomology(total_complex(k), degrees, w, exec);
  out.twilled = truncated_cohomology(twilled_sum(m), degrees, w, exec);
  out.agree = out.total.dims.size() == out.twilled.dims.size();
  for (std::size_t i = 0; out.agree && i < out.total.dims.size(); ++i)
    out.agree = out.total.dims[i].cohomology == out.twilled.dims[i].cohomology &&
                out.total.dims[i].cocycles == out.twilled.dims[i].cocycles;
  return out;
}

}  // namespace algebroid

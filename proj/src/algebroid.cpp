#include <algebroid/algebroid.hpp>

#include <algebroid/kernels.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace algebroid {

RingElement apply_field(const VectorField& x, const RingElement& f) {
  RingElement r(f.ring());
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (x[v].is_zero()) continue;
    RingElement d = f.partial(v);
    if (!d.is_zero()) r += x[v] * d;
  }
  return r;
}

VectorField field_commutator(const VectorField& x, const VectorField& y) {
  VectorField out;
  out.reserve(x.size());
  for (std::size_t v = 0; v < x.size(); ++v) out.push_back(apply_field(x, y[v]) - apply_field(y, x[v]));
  return out;
}

bool field_is_zero(const VectorField& x) {
  return std::all_of(x.begin(), x.end(), [](const RingElement& e) { return e.is_zero(); });
}

// ----------------------------------------------------------- StructureTable

StructureTable::StructureTable(const RingPtr& ring, std::size_t rank)
    : rank_(rank), c_(rank * rank * rank, RingElement(ring)) {}

void StructureTable::set(std::size_t i, std::size_t j, std::vector<RingElement> bracket) {
  if (i >= rank_ || j >= rank_ || bracket.size() != rank_) throw StructuralError("structure table: bad index");
  if (i == j) {
    if (std::any_of(bracket.begin(), bracket.end(), [](const RingElement& e) { return !e.is_zero(); }))
      throw StructuralError("bracket of equal basis elements must be zero");
    return;
  }
  for (std::size_t k = 0; k < rank_; ++k) {
    c_[(j * rank_ + i) * rank_ + k] = -bracket[k];
    c_[(i * rank_ + j) * rank_ + k] = std::move(bracket[k]);
  }
}

bool StructureTable::structure_is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](const RingElement& e) { return e.is_zero(); });
}

// ---------------------------------------------------------------- Algebroid

Algebroid::Algebroid(RingPtr base, std::size_t rank, std::vector<std::vector<RingElement>> anchor,
                     StructureTable structure, std::vector<std::string> basis_names, std::string name)
    : base_(std::move(base)), rank_(rank), anchor_(std::move(anchor)), structure_(std::move(structure)),
      basis_names_(std::move(basis_names)), name_(std::move(name)) {
  if (anchor_.size() != rank_) throw StructuralError("anchor must have one row per basis element");
  if (structure_.rank() != rank_) throw StructuralError("structure table rank mismatch");
  const std::size_t nd = base_->num_derivations();
  const std::size_t nv = base_->num_vars();
  for (auto& row : anchor_) {
    if (row.size() != nd) throw StructuralError("anchor row must list every base derivation");
    for (auto& e : row) {
      if (e.is_zero()) e = RingElement(base_);
      if (e.ring() != base_) throw StructuralError("anchor coefficient outside the base ring");
    }
  }
  for (std::size_t i = 0; i < rank_; ++i) {
    VectorField f(nv, RingElement(base_));
    for (std::size_t d = 0; d < nd; ++d) {
      if (anchor_[i][d].is_zero()) continue;
      const auto& der = base_->derivation(d);
      for (std::size_t v = 0; v < nv; ++v)
        if (!der.images[v].empty()) f[v] += anchor_[i][d] * RingElement(base_, der.images[v]);
    }
    action_.push_back(std::move(f));
  }
  if (basis_names_.empty())
    for (std::size_t i = 0; i < rank_; ++i) basis_names_.push_back("e" + std::to_string(i + 1));
  if (basis_names_.size() != rank_) throw StructuralError("basis name count mismatch");
  witness_ = verify_axioms(*this);
}

AlgebroidPtr Algebroid::make(RingPtr base, std::size_t rank, std::vector<std::vector<RingElement>> anchor,
                             StructureTable structure, std::vector<std::string> basis_names, std::string name) {
  return std::make_shared<const Algebroid>(std::move(base), rank, std::move(anchor), std::move(structure),
                                           std::move(basis_names), std::move(name));
}

bool Algebroid::anchor_is_zero() const {
  return std::all_of(action_.begin(), action_.end(), [](const VectorField& f) { return field_is_zero(f); });
}

int Algebroid::coefficient_degree() const {
  int d = 0;
  for (const auto& f : action_)
    for (const auto& e : f) d = std::max(d, e.polynomial_degree());
  for (std::size_t i = 0; i < rank_; ++i)
    for (std::size_t j = 0; j < rank_; ++j)
      for (std::size_t k = 0; k < rank_; ++k) d = std::max(d, c(i, j, k).polynomial_degree());
  return d;
}

int Algebroid::coefficient_extent() const {
  int d = 0;
  for (const auto& f : action_)
    for (const auto& e : f) d = std::max(d, e.laurent_extent());
  for (std::size_t i = 0; i < rank_; ++i)
    for (std::size_t j = 0; j < rank_; ++j)
      for (std::size_t k = 0; k < rank_; ++k) d = std::max(d, c(i, j, k).laurent_extent());
  return d;
}

// ------------------------------------------------------------------ Section

Section Section::zero(const AlgebroidPtr& owner) {
  return Section{owner, std::vector<RingElement>(owner->rank(), owner->zero())};
}

Section Section::basis(const AlgebroidPtr& owner, std::size_t i) {
  Section s = zero(owner);
  s.coeffs.at(i) = owner->one();
  return s;
}

bool Section::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const RingElement& e) { return e.is_zero(); });
}

Section& Section::operator+=(const Section& b) {
  if (owner != b.owner) throw StructuralError("section owner mismatch");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += b.coeffs[i];
  return *this;
}

Section& Section::operator-=(const Section& b) {
  if (owner != b.owner) throw StructuralError("section owner mismatch");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= b.coeffs[i];
  return *this;
}

Section operator*(const RingElement& f, Section s) {
  for (auto& c : s.coeffs) c = f * c;
  return s;
}

bool operator==(const Section& a, const Section& b) { return a.owner == b.owner && a.coeffs == b.coeffs; }

std::string Section::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].is_zero()) continue;
    if (!out.empty()) out += " + ";
    const std::string c = coeffs[i].to_string();
    const std::string& name = owner->basis_names()[i];
    if (c == "1") out += name;
    else if (coeffs[i].is_monomial() && c.find(' ') == std::string::npos) out += c + "*" + name;
    else out += "(" + c + ")*" + name;
  }
  return out.empty() ? "0" : out;
}

VectorField anchor_of(const Section& u) {
  const auto& l = *u.owner;
  VectorField f(l.base()->num_vars(), l.zero());
  for (std::size_t i = 0; i < l.rank(); ++i) {
    if (u.coeffs[i].is_zero()) continue;
    const auto& a = l.anchor_field(i);
    for (std::size_t v = 0; v < f.size(); ++v) f[v] += u.coeffs[i] * a[v];
  }
  return f;
}

RingElement anchor_apply(const Section& u, const RingElement& f) {
  if (f.ring() != u.owner->base()) throw StructuralError("function not in the algebroid base");
  return apply_field(anchor_of(u), f);
}

Section basis_bracket(const AlgebroidPtr& l, std::size_t i, std::size_t j) {
  Section s = Section::zero(l);
  for (std::size_t k = 0; k < l->rank(); ++k) s.coeffs[k] = l->c(i, j, k);
  return s;
}

Section bracket(const Section& u, const Section& v) {
  if (u.owner != v.owner) throw StructuralError("bracket: owner mismatch");
  const auto& l = *u.owner;
  const std::size_t n = l.rank();
  Section out = Section::zero(u.owner);
  for (std::size_t i = 0; i < n; ++i) {
    if (u.coeffs[i].is_zero()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || v.coeffs[j].is_zero()) continue;
      RingElement f = u.coeffs[i] * v.coeffs[j];
      for (std::size_t k = 0; k < n; ++k)
        if (!l.c(i, j, k).is_zero()) out.coeffs[k] += f * l.c(i, j, k);
    }
  }
  const VectorField au = anchor_of(u), av = anchor_of(v);
  for (std::size_t k = 0; k < n; ++k) {
    out.coeffs[k] += apply_field(au, v.coeffs[k]);
    out.coeffs[k] -= apply_field(av, u.coeffs[k]);
  }
  return out;
}

namespace {

/// Bracket using only the table and anchor fields, without an owning pointer.
std::vector<RingElement> raw_bracket(const Algebroid& l, const std::vector<RingElement>& u,
                                     const std::vector<RingElement>& v) {
  const std::size_t n = l.rank();
  const std::size_t nv = l.base()->num_vars();
  std::vector<RingElement> out(n, l.zero());
  VectorField au(nv, l.zero()), av(nv, l.zero());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < nv; ++x) {
      if (!u[i].is_zero()) au[x] += u[i] * l.anchor_field(i)[x];
      if (!v[i].is_zero()) av[x] += v[i] * l.anchor_field(i)[x];
    }
    if (u[i].is_zero()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || v[j].is_zero()) continue;
      RingElement f = u[i] * v[j];
      for (std::size_t k = 0; k < n; ++k)
        if (!l.c(i, j, k).is_zero()) out[k] += f * l.c(i, j, k);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] += apply_field(au, v[k]);
    out[k] -= apply_field(av, u[k]);
  }
  return out;
}

std::vector<RingElement> raw_basis(const Algebroid& l, std::size_t i) {
  std::vector<RingElement> s(l.rank(), l.zero());
  s[i] = l.one();
  return s;
}

std::vector<RingElement> raw_basis_bracket(const Algebroid& l, std::size_t i, std::size_t j) {
  std::vector<RingElement> s(l.rank(), l.zero());
  for (std::size_t k = 0; k < l.rank(); ++k) s[k] = l.c(i, j, k);
  return s;
}

}  // namespace

std::optional<AxiomWitness> verify_axioms(const Algebroid& l) {
  const std::size_t n = l.rank();
  // J(a,b,c) = [[a,b],c] + [[b,c],a] + [[c,a],b]
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        auto t1 = raw_bracket(l, raw_basis_bracket(l, i, j), raw_basis(l, k));
        auto t2 = raw_bracket(l, raw_basis_bracket(l, j, k), raw_basis(l, i));
        auto t3 = raw_bracket(l, raw_basis_bracket(l, k, i), raw_basis(l, j));
        bool zero = true;
        for (std::size_t m = 0; m < n; ++m) {
          t1[m] += t2[m];
          t1[m] += t3[m];
          zero = zero && t1[m].is_zero();
        }
        if (!zero) return AxiomWitness{AxiomWitness::Kind::jacobi_failure, {i, j, k}, t1};
      }
    }
  }
  // The anchor must intertwine brackets with commutators.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      VectorField lhs(l.base()->num_vars(), l.zero());
      for (std::size_t k = 0; k < n; ++k) {
        if (l.c(i, j, k).is_zero()) continue;
        for (std::size_t v = 0; v < lhs.size(); ++v) lhs[v] += l.c(i, j, k) * l.anchor_field(k)[v];
      }
      VectorField rhs = field_commutator(l.anchor_field(i), l.anchor_field(j));
      for (std::size_t v = 0; v < lhs.size(); ++v) lhs[v] -= rhs[v];
      if (!field_is_zero(lhs)) return AxiomWitness{AxiomWitness::Kind::anchor_morphism_failure, {i, j}, lhs};
    }
  }
  return std::nullopt;
}

std::string describe(const AxiomWitness& w, const Algebroid& l) {
  std::ostringstream os;
  const auto& names = l.basis_names();
  if (w.kind == AxiomWitness::Kind::jacobi_failure) {
    os << "jacobi-failure on (" << names[w.indices[0]] << "," << names[w.indices[1]] << ","
       << names[w.indices[2]] << "): residual ";
    std::string out;
    for (std::size_t k = 0; k < w.residual.size(); ++k) {
      if (w.residual[k].is_zero()) continue;
      if (!out.empty()) out += " + ";
      std::string c = w.residual[k].to_string();
      out += (c == "1" ? "" : (w.residual[k].is_monomial() ? c + "*" : "(" + c + ")*")) + names[k];
    }
    os << out;
  } else {
    os << "anchor-morphism-failure on (" << names[w.indices[0]] << "," << names[w.indices[1]] << "): residual ";
    std::string out;
    for (std::size_t v = 0; v < w.residual.size(); ++v) {
      if (w.residual[v].is_zero()) continue;
      if (!out.empty()) out += " + ";
      out += "(" + w.residual[v].to_string() + ")*d/d" + l.base()->var_name(v);
    }
    os << out;
  }
  return os.str();
}

// ------------------------------------------------------------------ catalog

namespace {

std::vector<std::vector<RingElement>> zero_anchor(const RingPtr& r, std::size_t n) {
  return std::vector<std::vector<RingElement>>(n, std::vector<RingElement>(r->num_derivations(), RingElement(r)));
}

/// Anchor rows from vector fields expressed on the coordinate derivations.
std::vector<std::vector<RingElement>> coordinate_anchor(const RingPtr& r, const std::vector<VectorField>& fields) {
  auto a = zero_anchor(r, fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].size() != r->num_vars()) throw StructuralError("vector field arity mismatch");
    for (std::size_t v = 0; v < r->num_vars(); ++v) a[i][v] = fields[i][v];
  }
  return a;
}

}  // namespace

AlgebroidPtr make_tangent(const RingPtr& r) {
  const std::size_t n = r->num_vars();
  std::vector<VectorField> fields;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    VectorField f(n, RingElement(r));
    f[i] = RingElement(r, Rational(1));
    fields.push_back(std::move(f));
    names.push_back("d" + r->var_name(i));
  }
  return Algebroid::make(r, n, coordinate_anchor(r, fields), StructureTable(r, n), names, "tangent");
}

AlgebroidPtr make_trivial_bundle(const RingPtr& r, std::size_t n) {
  return Algebroid::make(r, n, zero_anchor(r, n), StructureTable(r, n), {}, "trivial");
}

AlgebroidPtr make_lie_algebra_bundle(const RingPtr& r, std::size_t n, const std::vector<StructureConstant>& c) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<RingElement>> brackets;
  for (const auto& sc : c) {
    if (sc.i >= n || sc.j >= n || sc.k >= n) throw StructuralError("structure constant index out of range");
    if (sc.i == sc.j) {
      if (sc.value != 0) throw StructuralError("bracket of equal basis elements must be zero");
      continue;
    }
    auto key = sc.i < sc.j ? std::pair{sc.i, sc.j} : std::pair{sc.j, sc.i};
    auto& b = brackets.try_emplace(key, std::vector<RingElement>(n, RingElement(r))).first->second;
    b[sc.k] += RingElement(r, sc.i < sc.j ? sc.value : Rational(-sc.value));
  }
  StructureTable t(r, n);
  for (auto& [key, b] : brackets) t.set(key.first, key.second, std::move(b));
  return Algebroid::make(r, n, zero_anchor(r, n), std::move(t), {}, "lie-bundle");
}

namespace {

/// Monomials of a ring within polynomial degree `deg` and Laurent extent `ext`.
std::vector<Exponents> monomials_within(const RingPtr& r, int deg, int ext) {
  std::vector<Exponents> out;
  const std::size_t n = r->num_vars();
  Exponents e(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t v, int left) {
    if (v == n) {
      out.push_back(e);
      return;
    }
    if (r->is_laurent(v)) {
      for (int p = -ext; p <= ext; ++p) {
        e[v] = p;
        rec(v + 1, left);
      }
    } else {
      for (int p = 0; p <= left; ++p) {
        e[v] = p;
        rec(v + 1, left - p);
      }
    }
    e[v] = 0;
  };
  rec(0, deg);
  return out;
}

}  // namespace

AlgebroidPtr make_foliation(const RingPtr& r, const std::vector<VectorField>& generators) {
  const std::size_t n = generators.size();
  const std::size_t nv = r->num_vars();
  StructureTable t(r, n);
  int gen_deg = 0, gen_ext = 0;
  for (const auto& g : generators)
    for (const auto& e : g) {
      gen_deg = std::max(gen_deg, e.polynomial_degree());
      gen_ext = std::max(gen_ext, e.laurent_extent());
    }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      VectorField target = field_commutator(generators[i], generators[j]);
      if (field_is_zero(target)) continue;
      int deg = 0, ext = 0;
      for (const auto& e : target) {
        deg = std::max(deg, e.polynomial_degree());
        ext = std::max(ext, e.laurent_extent());
      }
      // Unknown c_k = sum over window monomials; one equation per (variable, monomial).
      const auto monos = monomials_within(r, deg, ext + gen_ext);
      std::map<std::pair<std::size_t, Exponents>, std::size_t> rows;
      auto row_of = [&](std::size_t v, const Exponents& e) {
        return rows.try_emplace({v, e}, rows.size()).first->second;
      };
      SparseMatrix m;
      for (std::size_t k = 0; k < n; ++k) {
        for (const auto& mono : monos) {
          std::map<std::size_t, Rational> col;
          for (std::size_t v = 0; v < nv; ++v) {
            RingElement prod = RingElement::monomial(r, mono) * generators[k][v];
            for (const auto& [e, c] : prod.terms()) col[row_of(v, e)] += c;
          }
          SparseVector sv;
          for (auto& [ri, c] : col)
            if (c != 0) sv.emplace_back(ri, c);
          m.columns.push_back(std::move(sv));
        }
      }
      SparseVector rhs;
      {
        std::map<std::size_t, Rational> col;
        for (std::size_t v = 0; v < nv; ++v)
          for (const auto& [e, c] : target[v].terms()) col[row_of(v, e)] += c;
        for (auto& [ri, c] : col) rhs.emplace_back(ri, c);
      }
      m.rows = rows.size();
      m.cols = m.columns.size();
      for (auto& col : m.columns)
        std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      auto x = sparse_solve(m, rhs, Exec::serial);
      if (!x) throw StructuralError("foliation not involutive in the given generators");
      std::vector<RingElement> br(n, RingElement(r));
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t q = 0; q < monos.size(); ++q) {
          const Rational& c = (*x)[k * monos.size() + q];
          if (c != 0) br[k] += RingElement::monomial(r, monos[q], c);
        }
      t.set(i, j, std::move(br));
    }
  }
  return Algebroid::make(r, n, coordinate_anchor(r, generators), std::move(t), {}, "foliation");
}

namespace {

using OneForm = std::vector<RingElement>;  // coefficients on dx_1..dx_n

OneForm exterior_d(const RingElement& f) {
  OneForm out;
  for (std::size_t k = 0; k < f.ring()->num_vars(); ++k) out.push_back(f.partial(k));
  return out;
}

RingElement contract_field(const VectorField& v, const OneForm& a) {
  RingElement r(a[0].ring());
  for (std::size_t k = 0; k < a.size(); ++k) r += v[k] * a[k];
  return r;
}

/// Cartan: L_V a = d(i_V a) + i_V(da).
OneForm lie_derivative(const VectorField& v, const OneForm& a) {
  const std::size_t n = a.size();
  OneForm out = exterior_d(contract_field(v, a));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k) {
      if (v[k].is_zero()) continue;
      out[l] += v[k] * (a[l].partial(k) - a[k].partial(l));
    }
  return out;
}

}  // namespace

AlgebroidPtr make_poisson(const RingPtr& r, const std::vector<std::vector<RingElement>>& pi) {
  const std::size_t n = r->num_vars();
  if (n == 0) throw StructuralError("Poisson structure needs coordinates");
  if (pi.size() != n) throw StructuralError("bivector must be n x n");
  auto p = [&](std::size_t i, std::size_t j) { return pi[i][j].is_zero() ? RingElement(r) : pi[i][j]; };
  for (std::size_t i = 0; i < n; ++i) {
    if (pi[i].size() != n) throw StructuralError("bivector must be n x n");
    for (std::size_t j = 0; j < n; ++j)
      if (!(p(i, j) == -p(j, i))) throw StructuralError("bivector must be antisymmetric");
  }
  // sharp(dx_i) = sum_j Pi^{ij} d/dx_j
  std::vector<VectorField> sharp;
  std::vector<OneForm> dx;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    VectorField s;
    for (std::size_t j = 0; j < n; ++j) s.push_back(p(i, j));
    sharp.push_back(std::move(s));
    OneForm b(n, RingElement(r));
    b[i] = RingElement(r, Rational(1));
    dx.push_back(std::move(b));
    names.push_back("d" + r->var_name(i));
  }
  // {a,b} = d<Pi, a^b> - L_{sharp b} a + L_{sharp a} b, with <Pi, dx_i ^ dx_j> = Pi^{ji}.
  StructureTable t(r, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      OneForm br = exterior_d(p(j, i));
      OneForm l1 = lie_derivative(sharp[j], dx[i]);
      OneForm l2 = lie_derivative(sharp[i], dx[j]);
      for (std::size_t k = 0; k < n; ++k) br[k] += l2[k] - l1[k];
      t.set(i, j, br);
    }
  return Algebroid::make(r, n, coordinate_anchor(r, sharp), std::move(t), names, "poisson");
}

RingElement schouten_component(const RingPtr& r, const std::vector<std::vector<RingElement>>& pi, std::size_t i,
                               std::size_t j, std::size_t k) {
  RingElement s(r);
  auto p = [&](std::size_t a, std::size_t b) { return pi[a][b].is_zero() ? RingElement(r) : pi[a][b]; };
  const std::size_t idx[3] = {i, j, k};
  for (int c = 0; c < 3; ++c) {
    std::size_t a = idx[c], b = idx[(c + 1) % 3], d = idx[(c + 2) % 3];
    for (std::size_t l = 0; l < r->num_vars(); ++l) s += p(a, l) * p(b, d).partial(l);
  }
  return s;
}

AlgebroidPtr make_log(const RingPtr& r, const std::vector<std::size_t>& divisor_vars) {
  const std::size_t n = r->num_vars();
  std::vector<VectorField> fields;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    VectorField f(n, RingElement(r));
    const bool log = std::find(divisor_vars.begin(), divisor_vars.end(), i) != divisor_vars.end();
    f[i] = log ? RingElement::variable(r, i) : RingElement(r, Rational(1));
    fields.push_back(std::move(f));
    names.push_back(log ? r->var_name(i) + "d" + r->var_name(i) : "d" + r->var_name(i));
  }
  for (auto v : divisor_vars)
    if (v >= n) throw StructuralError("divisor variable out of range");
  // Coordinate-diagonal fields commute, so the table is zero.
  return Algebroid::make(r, n, coordinate_anchor(r, fields), StructureTable(r, n), names, "log");
}

// ---------------------------------------------------------------- morphisms

Section AlgebroidMorphism::operator()(const Section& u) const {
  if (u.owner != source) throw StructuralError("morphism applied outside its source");
  Section out = Section::zero(target);
  for (std::size_t i = 0; i < u.coeffs.size(); ++i)
    if (!u.coeffs[i].is_zero()) out += u.coeffs[i] * images[i];
  return out;
}

std::optional<std::string> AlgebroidMorphism::check() const {
  if (source->base() != target->base()) return "source and target over different bases";
  if (images.size() != source->rank()) return "one image per source basis element required";
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].owner != target) return "image not a target section";
    VectorField a = anchor_of(images[i]);
    for (std::size_t v = 0; v < a.size(); ++v)
      if (!(a[v] == source->anchor_field(i)[v]))
        return "anchor not preserved on " + source->basis_names()[i];
  }
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      Section lhs = (*this)(basis_bracket(source, i, j));
      Section rhs = bracket(images[i], images[j]);
      if (!(lhs == rhs))
        return "bracket not preserved on (" + source->basis_names()[i] + "," + source->basis_names()[j] + ")";
    }
  return std::nullopt;
}

AlgebroidMorphism identity_morphism(const AlgebroidPtr& l) {
  AlgebroidMorphism m{l, l, {}};
  for (std::size_t i = 0; i < l->rank(); ++i) m.images.push_back(Section::basis(l, i));
  return m;
}

bool same_structure(const Algebroid& a, const Algebroid& b) {
  if (a.base() != b.base() || a.rank() != b.rank()) return false;
  for (std::size_t i = 0; i < a.rank(); ++i)
    for (std::size_t v = 0; v < a.base()->num_vars(); ++v)
      if (!(a.anchor_field(i)[v] == b.anchor_field(i)[v])) return false;
  for (std::size_t i = 0; i < a.rank(); ++i)
    for (std::size_t j = 0; j < a.rank(); ++j)
      for (std::size_t k = 0; k < a.rank(); ++k)
        if (!(a.c(i, j, k) == b.c(i, j, k))) return false;
  return true;
}

}  // namespace algebroid

#include <algebroid/cech.hpp>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <tuple>

namespace algebroid {

namespace {

RingMap compose(const RingMap& inner, const RingMap& outer) {
  std::vector<RingElement> imgs;
  for (const auto& f : inner.images()) imgs.push_back(outer(f));
  return RingMap(inner.source(), outer.target(), std::move(imgs));
}

Matrix map_matrix(const RingMap& m, const Matrix& a) {
  Matrix out;
  for (const auto& row : a) {
    std::vector<RingElement> r;
    for (const auto& e : row) r.push_back(m(e));
    out.push_back(std::move(r));
  }
  return out;
}

/// theta on the old frame, coefficients pushed along m; new frame
/// e'_j = sum_i frame[j][i] e_i.
LForm change_frame(const LForm& theta, const RingMap& m, const Matrix& frame, const AlgebroidPtr& owner) {
  const std::size_t p = theta.degree();
  const std::size_t n = owner->rank();
  LForm out(owner, p);
  if (theta.is_zero()) return out;
  for (const auto& t : index_tuples(n, p)) {
    RingElement acc(owner->base());
    IndexTuple idx(p, 0);
    // enumerate every index list i_1..i_p
    std::function<void(std::size_t, RingElement)> rec = [&](std::size_t k, RingElement w) {
      if (w.is_zero()) return;
      if (k == p) {
        auto v = theta.value(idx);
        if (!v.is_zero()) acc += w * m(v);
        return;
      }
      for (std::size_t i = 0; i < n; ++i) {
        idx[k] = static_cast<int>(i);
        rec(k + 1, w * frame[t[k]][i]);
      }
    };
    rec(0, owner->one());
    if (!acc.is_zero()) out.add(t, acc);
  }
  return out;
}

std::string pair_name(const Cover& c, std::size_t a, std::size_t b) {
  return c.charts()[a].name + "|" + c.charts()[b].name;
}

void check_pair_shape(const Cover& c, const CechPair& p) {
  if (p.phi.size() != c.overlaps().size()) throw StructuralError("one phi per overlap required");
  if (p.q.size() != c.charts().size()) throw StructuralError("one Q slot per chart required");
  for (std::size_t o = 0; o < c.overlaps().size(); ++o)
    if (p.phi[o].owner() != c.overlaps()[o].algebroid || p.phi[o].degree() != 1)
      throw StructuralError("phi on " + pair_name(c, c.overlaps()[o].a, c.overlaps()[o].b) +
                            " must be a 1-form on the overlap algebroid");
  for (std::size_t a = 0; a < c.charts().size(); ++a)
    if (p.q[a] && (p.q[a]->owner() != c.charts()[a].algebroid || p.q[a]->degree() != 2))
      throw StructuralError("Q on " + c.charts()[a].name + " must be a 2-form on the chart algebroid");
}

/// phi_ab + phi_bc - phi_ac on a triple, in chart a's frame.
LForm triple_delta(const Cover& c, const TripleOverlap& t, const std::vector<LForm>& phi) {
  const auto ab = *c.overlap_index(t.a, t.b), bc = *c.overlap_index(t.b, t.c), ac = *c.overlap_index(t.a, t.c);
  const auto& l = t.algebroid;
  const auto id = identity_matrix(t.ring, l->rank());
  auto tinv_ab = map_matrix(t.from_ab, c.overlaps()[ab].transition_inverse);
  return change_frame(phi[ab], t.from_ab, id, l) + change_frame(phi[bc], t.from_bc, tinv_ab, l) -
         change_frame(phi[ac], t.from_ac, id, l);
}

std::vector<RingElement> unit_powers(const RingPtr& r) {
  std::vector<RingElement> fs;
  for (std::size_t v = 0; v < r->num_vars(); ++v) {
    fs.push_back(RingElement::variable(r, v));
    if (r->is_laurent(v)) fs.push_back(RingElement::variable(r, v, -1));
  }
  return fs;
}

std::string vector_string(const ModuleVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].to_string();
  return s + ")";
}

}  // namespace

// ---------------------------------------------------------------- restriction

AlgebroidPtr restrict_algebroid(const AlgebroidPtr& l, const RingMap& m) {
  const auto& src = l->base();
  const auto& tgt = m.target();
  if (m.source() != src) throw StructuralError("ring map does not start at the algebroid's base");
  const std::size_t nv = src->num_vars();
  if (tgt->num_vars() != nv) throw StructuralError("restriction needs equally many variables on both sides");
  Matrix jac = zero_matrix(tgt, nv);
  for (std::size_t u = 0; u < nv; ++u)
    for (std::size_t v = 0; v < nv; ++v) jac[u][v] = m.images()[u].partial(v);
  auto jinv = inverse(jac);
  if (!jinv) throw StructuralError("ring map Jacobian is not invertible");
  const std::size_t n = l->rank();
  std::vector<std::vector<RingElement>> anchor;
  for (std::size_t i = 0; i < n; ++i) {
    ModuleVector pushed;
    for (const auto& f : l->anchor_field(i)) pushed.push_back(m(f));
    auto x = matrix_apply(*jinv, pushed);
    std::vector<RingElement> coeffs(tgt->num_derivations(), RingElement(tgt));
    for (std::size_t v = 0; v < nv; ++v) {
      auto d = tgt->derivation_index("d/d" + tgt->var_name(v));
      if (!d) throw StructuralError("target ring lacks coordinate derivations");
      coeffs[*d] = x[v];
    }
    anchor.push_back(std::move(coeffs));
  }
  StructureTable table(tgt, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<RingElement> br;
      for (std::size_t k = 0; k < n; ++k) br.push_back(m(l->c(i, j, k)));
      table.set(i, j, std::move(br));
    }
  return Algebroid::make(tgt, n, std::move(anchor), std::move(table), l->basis_names(), l->name());
}

// ---------------------------------------------------------------- covers

std::size_t Cover::add_chart(std::string chart_name, AlgebroidPtr l) {
  charts_.push_back({std::move(chart_name), std::move(l)});
  return charts_.size() - 1;
}

std::size_t Cover::add_overlap(std::size_t a, std::size_t b, RingPtr ring, RingMap from_a, RingMap from_b,
                               Matrix transition, std::optional<RingElement> bundle) {
  if (a >= b || b >= charts_.size()) throw StructuralError("overlap needs chart indices a < b");
  if (overlap_index(a, b)) throw StructuralError("overlap declared twice");
  if (from_a.target() != ring || from_b.target() != ring) throw StructuralError("overlap maps must land in its ring");
  const auto& la = charts_[a].algebroid;
  const auto& lb = charts_[b].algebroid;
  if (la->rank() != lb->rank()) throw StructuralError("charts of different rank cannot be glued");
  auto ra = restrict_algebroid(la, from_a);
  auto rb = restrict_algebroid(lb, from_b);
  const std::size_t n = la->rank();
  if (transition.size() != n) throw StructuralError("transition must be square of the algebroid rank");
  for (const auto& row : transition)
    if (row.size() != n) throw StructuralError("transition must be square of the algebroid rank");
  auto tinv = inverse(transition);
  if (!tinv) throw StructuralError("transition is not invertible on " + pair_name(*this, a, b));
  AlgebroidMorphism psi{rb, ra, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Section s = Section::zero(ra);
    for (std::size_t j = 0; j < n; ++j) s.coeffs[j] = transition[i][j];
    psi.images.push_back(std::move(s));
  }
  if (auto why = psi.check())
    throw StructuralError("transition does not identify the structures on " + pair_name(*this, a, b) + ": " + *why);
  if (bundle) {
    if (bundle->ring() != ring) throw StructuralError("bundle transition must live on the overlap ring");
    if (!bundle->is_unit()) throw StructuralError("bundle transition is not invertible on " + pair_name(*this, a, b));
  }
  overlaps_.push_back({a, b, std::move(ring), std::move(from_a), std::move(from_b), ra, std::move(transition),
                       std::move(*tinv), std::move(bundle)});
  return overlaps_.size() - 1;
}

std::size_t Cover::add_triple(std::size_t a, std::size_t b, std::size_t c, RingPtr ring, RingMap from_ab,
                              RingMap from_bc, RingMap from_ac) {
  auto ab = overlap_index(a, b), bc = overlap_index(b, c), ac = overlap_index(a, c);
  if (!ab || !bc || !ac) throw StructuralError("triple overlap needs its three pairwise overlaps");
  if (from_ab.source() != overlaps_[*ab].ring || from_bc.source() != overlaps_[*bc].ring ||
      from_ac.source() != overlaps_[*ac].ring)
    throw StructuralError("triple overlap maps must start at the pairwise overlap rings");
  auto to_t = compose(overlaps_[*ab].from_a, from_ab);
  auto l = restrict_algebroid(charts_[a].algebroid, to_t);
  triples_.push_back({a, b, c, std::move(ring), std::move(from_ab), std::move(from_bc), std::move(from_ac), l});
  return triples_.size() - 1;
}

std::optional<std::size_t> Cover::overlap_index(std::size_t a, std::size_t b) const {
  for (std::size_t o = 0; o < overlaps_.size(); ++o)
    if (overlaps_[o].a == a && overlaps_[o].b == b) return o;
  return std::nullopt;
}

bool Cover::has_bundle() const {
  return !overlaps_.empty() &&
         std::all_of(overlaps_.begin(), overlaps_.end(), [](const Overlap& o) { return o.bundle.has_value(); });
}

Cover make_p1_cover(P1Algebroid kind, std::optional<int> k) {
  auto rz = ChartRing::polynomial({"z"}, "U0");
  auto rw = ChartRing::polynomial({"w"}, "U1");
  auto ro = ChartRing::laurent({"z"}, "U01");
  Cover c;
  c.name = "P1";
  c.twist = k;
  const bool log = kind == P1Algebroid::log;
  c.model = log ? CoverModel::p1_log : CoverModel::p1_tangent;
  c.add_chart("U0", log ? make_log(rz, {0}) : make_tangent(rz));
  c.add_chart("U1", log ? make_log(rw, {0}) : make_tangent(rw));
  RingMap fa(rz, ro, {RingElement::variable(ro, 0)});
  RingMap fb(rw, ro, {RingElement::variable(ro, 0, -1)});
  // d/dw = -z^2 d/dz and w d/dw = -z d/dz
  Matrix t{{log ? RingElement(ro, Rational(-1)) : RingElement::monomial(ro, {2}, Rational(-1))}};
  std::optional<RingElement> g;
  if (k) g = RingElement::variable(ro, 0, *k);
  c.add_overlap(0, 1, ro, fa, fb, t, g);
  return c;
}

Cover make_single_chart_cover(const AlgebroidPtr& l, std::string name) {
  Cover c;
  c.name = name;
  c.add_chart(std::move(name), l);
  return c;
}

Cover make_identity_cover(const AlgebroidPtr& l, std::size_t copies) {
  Cover c;
  c.name = "copies";
  const auto& r = l->base();
  for (std::size_t a = 0; a < copies; ++a) c.add_chart("U" + std::to_string(a), l);
  const auto id = RingMap::identity(r);
  for (std::size_t a = 0; a < copies; ++a)
    for (std::size_t b = a + 1; b < copies; ++b) c.add_overlap(a, b, r, id, id, identity_matrix(r, l->rank()));
  for (std::size_t a = 0; a < copies; ++a)
    for (std::size_t b = a + 1; b < copies; ++b)
      for (std::size_t d = b + 1; d < copies; ++d) c.add_triple(a, b, d, r, id, id, id);
  return c;
}

LForm restrict_form(const Cover& c, std::size_t o, std::size_t chart, const LForm& theta) {
  const auto& ov = c.overlaps().at(o);
  if (theta.owner() != c.charts().at(chart).algebroid) throw StructuralError("form does not live on that chart");
  if (chart == ov.a) return change_frame(theta, ov.from_a, identity_matrix(ov.ring, ov.algebroid->rank()), ov.algebroid);
  if (chart == ov.b) return change_frame(theta, ov.from_b, ov.transition_inverse, ov.algebroid);
  throw StructuralError("chart does not meet the overlap");
}

// ---------------------------------------------------------------- cocycles

CechPair CechPair::zero(const Cover& c) {
  CechPair p;
  for (const auto& o : c.overlaps()) p.phi.emplace_back(o.algebroid, 1);
  p.q.resize(c.charts().size());
  return p;
}

LForm CechPair::q_at(const Cover& c, std::size_t chart) const {
  if (chart < q.size() && q[chart]) return *q[chart];
  return LForm(c.charts().at(chart).algebroid, 2);
}

std::string CocycleReport::to_string() const {
  switch (status) {
    case Status::verified:
      return "verified";
    case Status::degenerate_verified:
      return "degenerate-verified (no 2-forms on a rank-1 chart)";
    case Status::failed:
      break;
  }
  return equation + " fails on " + location + ": residual " + residual;
}

CocycleReport verify_cocycle(const Cover& c, const CechPair& p) {
  check_pair_shape(c, p);
  CocycleReport rep;
  for (std::size_t a = 0; a < c.charts().size(); ++a) {
    auto dq = d_L(p.q_at(c, a));
    if (!dq.is_zero()) return {CocycleReport::Status::failed, "d_L Q = 0", c.charts()[a].name, dq.to_string()};
  }
  for (std::size_t o = 0; o < c.overlaps().size(); ++o) {
    const auto& ov = c.overlaps()[o];
    auto lhs = d_L(p.phi[o]);
    auto rhs = restrict_form(c, o, ov.b, p.q_at(c, ov.b)) - restrict_form(c, o, ov.a, p.q_at(c, ov.a));
    if (!(lhs == rhs))
      return {CocycleReport::Status::failed, "d_L phi = Q_b - Q_a", pair_name(c, ov.a, ov.b), (lhs - rhs).to_string()};
  }
  for (const auto& t : c.triples()) {
    auto delta = triple_delta(c, t, p.phi);
    if (!delta.is_zero())
      return {CocycleReport::Status::failed, "delta phi = 0",
              c.charts()[t.a].name + "|" + c.charts()[t.b].name + "|" + c.charts()[t.c].name, delta.to_string()};
  }
  for (std::size_t a = 0; a < c.charts().size(); ++a)
    if (p.q[a] && c.charts()[a].algebroid->rank() < 2) rep.status = CocycleReport::Status::degenerate_verified;
  return rep;
}

std::string CechResidue::to_string() const { return "res = " + algebroid::to_string(value); }

namespace {

struct RowKey {
  int kind;  // 0: chart equation, 1: overlap equation
  std::size_t where;
  SliceKey key;
  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

using Column = std::vector<std::pair<RowKey, Rational>>;

void append(Column& col, int kind, std::size_t where, const LForm& f, const Rational& sign) {
  for (const auto& [k, q] : to_cochain(f)) col.push_back({{kind, where, k}, sign * q});
}

}  // namespace

CoboundaryReport coboundary_test(const Cover& c, const CechPair& p1, const CechPair& p2, const TruncationWindow& w,
                                 Exec exec) {
  validate_window(w);
  for (const auto* p : {&p1, &p2}) {
    auto rep = verify_cocycle(c, *p);
    if (rep.status == CocycleReport::Status::failed) throw StructuralError("not a Cech cocycle: " + rep.to_string());
  }
  CoboundaryReport out;
  out.window = w;

  struct Unknown {
    std::size_t chart, basis;
    Exponents exps;
  };
  std::vector<Unknown> unknowns;
  for (std::size_t a = 0; a < c.charts().size(); ++a) {
    const auto& l = c.charts()[a].algebroid;
    for (const auto& m : window_monomials(l->base(), w))
      for (std::size_t j = 0; j < l->rank(); ++j) unknowns.push_back({a, j, m});
  }
  auto eta_of = [&](const Unknown& u) {
    const auto& l = c.charts()[u.chart].algebroid;
    LForm e(l, 1);
    e.add({static_cast<int>(u.basis)}, RingElement::monomial(l->base(), u.exps));
    return e;
  };
  auto columns = kernels::map_indices<Column>(
      unknowns.size(),
      [&](std::size_t i) {
        Column col;
        const auto& u = unknowns[i];
        auto e = eta_of(u);
        append(col, 0, u.chart, d_L(e), Rational(1));
        for (std::size_t o = 0; o < c.overlaps().size(); ++o) {
          const auto& ov = c.overlaps()[o];
          if (ov.b == u.chart) append(col, 1, o, restrict_form(c, o, u.chart, e), Rational(1));
          if (ov.a == u.chart) append(col, 1, o, restrict_form(c, o, u.chart, e), Rational(-1));
        }
        return col;
      },
      exec);
  Column target;
  for (std::size_t a = 0; a < c.charts().size(); ++a) append(target, 0, a, p2.q_at(c, a) - p1.q_at(c, a), Rational(1));
  for (std::size_t o = 0; o < c.overlaps().size(); ++o) append(target, 1, o, p2.phi[o] - p1.phi[o], Rational(1));

  std::map<RowKey, std::size_t> rows;
  for (const auto& col : columns)
    for (const auto& [k, q] : col) rows.try_emplace(k, 0);
  for (const auto& [k, q] : target) rows.try_emplace(k, 0);
  std::size_t id = 0;
  for (auto& [k, v] : rows) v = id++;
  auto to_sparse = [&](const Column& col) {
    std::map<std::size_t, Rational> acc;
    for (const auto& [k, q] : col) acc[rows.at(k)] += q;
    SparseVector sv;
    for (auto& [i, q] : acc)
      if (q != 0) sv.push_back({i, q});
    return sv;
  };
  SparseMatrix m;
  m.rows = rows.size();
  m.cols = columns.size();
  for (const auto& col : columns) m.columns.push_back(to_sparse(col));
  auto sol = sparse_solve(m, to_sparse(target), exec);

  if (sol) {
    for (std::size_t a = 0; a < c.charts().size(); ++a) out.eta.emplace_back(c.charts()[a].algebroid, 1);
    for (std::size_t i = 0; i < unknowns.size(); ++i)
      if ((*sol)[i] != 0) out.eta[unknowns[i].chart] += RingElement(c.charts()[unknowns[i].chart].algebroid->base(), (*sol)[i]) * eta_of(unknowns[i]);
    // substitution
    for (std::size_t a = 0; a < c.charts().size(); ++a)
      if (!(d_L(out.eta[a]) == p2.q_at(c, a) - p1.q_at(c, a)))
        throw StructuralError("coboundary solution fails substitution on " + c.charts()[a].name);
    for (std::size_t o = 0; o < c.overlaps().size(); ++o) {
      const auto& ov = c.overlaps()[o];
      if (!(restrict_form(c, o, ov.b, out.eta[ov.b]) - restrict_form(c, o, ov.a, out.eta[ov.a]) ==
            p2.phi[o] - p1.phi[o]))
        throw StructuralError("coboundary solution fails substitution on " + pair_name(c, ov.a, ov.b));
    }
    out.status = CoboundaryReport::Status::equivalent;
    return out;
  }
  if (c.model == CoverModel::p1_tangent) {
    // coefficient of z^{-1} dz: polynomial eta_0 and -eta_1(1/z) z^{-2} never reach it
    auto diff = p1.phi[0] - p2.phi[0];
    auto res = diff.coefficient({0}).coefficient({-1});
    if (res != 0) {
      out.status = CoboundaryReport::Status::inequivalent;
      out.residue = CechResidue{0, res};
      return out;
    }
  }
  out.status = CoboundaryReport::Status::inequivalent_in_window;
  return out;
}

CechPair atiyah_cocycle(const Cover& c) {
  if (!c.has_bundle()) throw StructuralError("cover carries no line bundle");
  CechPair p = CechPair::zero(c);
  for (std::size_t o = 0; o < c.overlaps().size(); ++o) {
    const auto& ov = c.overlaps()[o];
    const auto& g = *ov.bundle;
    if (!g.is_unit()) throw StructuralError("transition function is not invertible: " + g.to_string());
    auto ginv = g.inverse();
    for (std::size_t j = 0; j < ov.algebroid->rank(); ++j) {
      auto v = ginv * apply_field(ov.algebroid->anchor_field(j), g);
      if (!v.is_zero()) p.phi[o].add({static_cast<int>(j)}, v);
    }
  }
  return p;
}

// ---------------------------------------------------------------- gluing

GluingReport glue_sridharan(const Cover& c, const CechPair& p) {
  check_pair_shape(c, p);
  GluingReport rep;
  for (std::size_t o = 0; o < c.overlaps().size(); ++o) {
    const auto& ov = c.overlaps()[o];
    const auto& l = ov.algebroid;
    auto qa = restrict_form(c, o, ov.a, p.q_at(c, ov.a));
    auto qb = restrict_form(c, o, ov.b, p.q_at(c, ov.b));
    const auto where = " on " + pair_name(c, ov.a, ov.b);
    if (!d_L(qa).is_zero() || !d_L(qb).is_zero()) {
      rep.failure = "twist is not closed" + where;
      return rep;
    }
    AlgebraMap m;
    m.target = build_relations(l, qa);
    m.source = build_relations(l, qb);
    for (std::size_t i = 0; i < l->rank(); ++i)
      m.images.push_back(PbwElement::generator(m.target, i) +
                         PbwElement::scalar(m.target, p.phi[o].coefficient({static_cast<int>(i)})));
    if (auto why = m.check_relations()) {
      rep.failure = "relation not preserved" + where + ": " + *why;
      return rep;
    }
    rep.maps.push_back({o, std::move(m)});
  }
  // g_ab g_bc g_ca on generators is e -> e + (phi_ab + phi_bc - phi_ac)(e)
  for (const auto& t : c.triples()) {
    auto delta = triple_delta(c, t, p.phi);
    if (!delta.is_zero()) {
      rep.failure = "g_ab g_bc g_ca is not the identity on " + c.charts()[t.a].name + "|" + c.charts()[t.b].name +
                    "|" + c.charts()[t.c].name + ": generators shift by " + delta.to_string();
      return rep;
    }
  }
  return rep;
}

// ---------------------------------------------------------------- lambda modules

LocalConnectionBunch LocalConnectionBunch::line_bundle(const Cover& c, std::vector<Connection> connections) {
  LocalConnectionBunch b;
  b.rank = 1;
  b.connections = std::move(connections);
  for (const auto& o : c.overlaps())
    b.transitions.push_back(Matrix{{o.bundle ? *o.bundle : RingElement(o.ring, Rational(1))}});
  return b;
}

std::string LambdaWitness::to_string() const {
  const char* k = kind == Kind::module_axiom ? "module axiom" : kind == Kind::overlap ? "overlap condition"
                                                                                      : "transition cocycle";
  return std::string(k) + " fails on " + location + ": " + detail;
}

std::optional<LambdaWitness> verify_lambda_module(const Cover& c, const CechPair& p, const LocalConnectionBunch& b) {
  check_pair_shape(c, p);
  if (b.connections.size() != c.charts().size()) throw StructuralError("one connection per chart required");
  if (b.transitions.size() != c.overlaps().size()) throw StructuralError("one transition per overlap required");
  const std::size_t r = b.rank;
  for (std::size_t a = 0; a < c.charts().size(); ++a) {
    const auto& conn = b.connections[a];
    if (conn.algebroid() != c.charts()[a].algebroid || conn.rank() != r)
      throw StructuralError("connection on " + c.charts()[a].name + " has the wrong algebroid or rank");
  }
  // module axioms on frame vectors
  for (std::size_t a = 0; a < c.charts().size(); ++a) {
    const auto& conn = b.connections[a];
    const auto& l = conn.algebroid();
    const auto q = p.q_at(c, a);
    const auto& ring = l->base();
    for (std::size_t s = 0; s < r; ++s) {
      ModuleVector e(r, RingElement(ring));
      e[s] = RingElement(ring, Rational(1));
      for (std::size_t i = 0; i < l->rank(); ++i)
        for (const auto& f : unit_powers(ring)) {
          ModuleVector fe(r, RingElement(ring));
          fe[s] = f;
          auto lhs = conn.covariant(i, fe);
          auto fne = conn.covariant(i, e);
          auto af = apply_field(l->anchor_field(i), f);
          for (std::size_t t = 0; t < r; ++t) {
            lhs[t] -= f * fne[t];
            if (t == s) lhs[t] -= af;
          }
          if (std::any_of(lhs.begin(), lhs.end(), [](const RingElement& x) { return !x.is_zero(); }))
            return LambdaWitness{LambdaWitness::Kind::module_axiom, c.charts()[a].name,
                                 "[" + l->basis_names()[i] + ", " + f.to_string() + "] on s" + std::to_string(s + 1) +
                                     " leaves " + vector_string(lhs)};
        }
      for (std::size_t j = 0; j < l->rank(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
          auto lhs = conn.covariant(j, conn.covariant(i, e));
          auto other = conn.covariant(i, conn.covariant(j, e));
          auto br = conn.covariant(basis_bracket(l, j, i), e);
          auto qv = q.value({static_cast<int>(j), static_cast<int>(i)});
          for (std::size_t t = 0; t < r; ++t) {
            lhs[t] -= other[t];
            lhs[t] -= br[t];
            if (t == s) lhs[t] -= qv;
          }
          if (std::any_of(lhs.begin(), lhs.end(), [](const RingElement& x) { return !x.is_zero(); }))
            return LambdaWitness{LambdaWitness::Kind::module_axiom, c.charts()[a].name,
                                 "[" + l->basis_names()[j] + ", " + l->basis_names()[i] + "] on s" +
                                     std::to_string(s + 1) + " leaves " + vector_string(lhs)};
        }
    }
  }
  // overlaps
  for (std::size_t o = 0; o < c.overlaps().size(); ++o) {
    const auto& ov = c.overlaps()[o];
    const auto& l = ov.algebroid;
    const auto& g = b.transitions[o];
    auto ginv = inverse(g);
    if (!ginv)
      return LambdaWitness{LambdaWitness::Kind::overlap, pair_name(c, ov.a, ov.b), "transition is not invertible"};
    const auto& ca = b.connections[ov.a];
    const auto& cb = b.connections[ov.b];
    for (std::size_t j = 0; j < l->rank(); ++j) {
      Matrix ab = zero_matrix(ov.ring, r);
      for (std::size_t i = 0; i < l->rank(); ++i)
        if (!ov.transition_inverse[j][i].is_zero())
          ab = ab + scale(ov.transition_inverse[j][i], map_matrix(ov.from_b, cb.component(i)));
      Matrix dg = zero_matrix(ov.ring, r);
      for (std::size_t u = 0; u < r; ++u)
        for (std::size_t v = 0; v < r; ++v) dg[u][v] = apply_field(l->anchor_field(j), g[u][v]);
      Matrix expected = *ginv * map_matrix(ov.from_a, ca.component(j)) * g + *ginv * dg +
                        scale(p.phi[o].coefficient({static_cast<int>(j)}), identity_matrix(ov.ring, r));
      if (!is_zero(ab - expected))
        return LambdaWitness{LambdaWitness::Kind::overlap, pair_name(c, ov.a, ov.b),
                             "component " + l->basis_names()[j] + ": nabla_b gives " + to_string(ab) + ", expected " +
                                 to_string(expected)};
    }
  }
  for (const auto& t : c.triples()) {
    const auto ab = *c.overlap_index(t.a, t.b), bc = *c.overlap_index(t.b, t.c), ac = *c.overlap_index(t.a, t.c);
    auto lhs = map_matrix(t.from_ab, b.transitions[ab]) * map_matrix(t.from_bc, b.transitions[bc]);
    auto rhs = map_matrix(t.from_ac, b.transitions[ac]);
    if (!is_zero(lhs - rhs))
      return LambdaWitness{LambdaWitness::Kind::transition_cocycle,
                           c.charts()[t.a].name + "|" + c.charts()[t.b].name + "|" + c.charts()[t.c].name,
                           "G_ab G_bc = " + to_string(lhs) + ", G_ac = " + to_string(rhs)};
  }
  return std::nullopt;
}

LocalConnectionBunch connection_from_coboundary(const Cover& c, const std::vector<LForm>& eta) {
  if (eta.size() != c.charts().size()) throw StructuralError("one eta per chart required");
  std::vector<Connection> conns;
  for (std::size_t a = 0; a < c.charts().size(); ++a) {
    const auto& l = c.charts()[a].algebroid;
    std::vector<Matrix> comps;
    // eta solves (0, 0) - atiyah = delta eta, so A = -eta glues by g^{-1} d g
    for (std::size_t j = 0; j < l->rank(); ++j) comps.push_back(Matrix{{-eta[a].coefficient({static_cast<int>(j)})}});
    conns.emplace_back(l, 1, std::move(comps));
  }
  return LocalConnectionBunch::line_bundle(c, std::move(conns));
}

// ---------------------------------------------------------------- O(k) on P^1

namespace {

LineBundleDims eliminate(const Cover& c, int k, int window, Exec exec) {
  const auto& ov = c.overlaps().front();
  const auto& g = *ov.bundle;
  const RingPtr r0 = c.charts()[0].algebroid->base(), r1 = c.charts()[1].algebroid->base();
  // delta(f0, f1) = f0 - g f1 on the overlap, exponents in [-W, W]
  SparseMatrix m;
  m.rows = static_cast<std::size_t>(2 * window + 1);
  auto add_column = [&](const RingElement& img) {
    SparseVector col;
    for (const auto& [e, q] : img.terms()) {
      if (std::abs(e[0]) > window) return;
      col.push_back({static_cast<std::size_t>(e[0] + window), q});
    }
    std::sort(col.begin(), col.end());
    m.columns.push_back(std::move(col));
  };
  for (int n = 0; n <= window + std::abs(k); ++n) {
    add_column(ov.from_a(RingElement::variable(r0, 0, n)));
    add_column(-(g * ov.from_b(RingElement::variable(r1, 0, n))));
  }
  m.cols = m.columns.size();
  const auto rank = sparse_rank(m, exec);
  return {k, window, m.cols - rank, m.rows - rank, false};
}

}  // namespace

LineBundleDims line_bundle_cohomology(int k, int window, Exec exec) {
  if (window <= std::abs(k)) throw StructuralError("window must exceed |k|");
  auto c = make_p1_cover(P1Algebroid::tangent, k);
  auto d = eliminate(c, k, window, exec);
  auto wider = eliminate(c, k, window + 2, exec);
  d.stable = d.h0 == wider.h0 && d.h1 == wider.h1;
  return d;
}

LineBundleDims line_bundle_cohomology_by_counting(int k, int window) {
  if (window <= std::abs(k)) throw StructuralError("window must exceed |k|");
  LineBundleDims d{k, window, 0, 0, true};
  // f0 = z^n (n >= 0) equals g f1 = z^{k-m} (m >= 0) when n = k - m
  for (int n = 0; n <= window; ++n)
    if (k - n >= 0) ++d.h0;
  // z^e is hit by chart 0 when e >= 0 and by chart 1 when e <= k
  for (int e = -window; e <= window; ++e)
    if (e < 0 && e > k) ++d.h1;
  return d;
}

}  // namespace algebroid

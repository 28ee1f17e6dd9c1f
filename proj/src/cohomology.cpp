#include <algebroid/cohomology.hpp>

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace algebroid {

std::string TruncationWindow::to_string() const {
  return "D=" + std::to_string(degree) + ",W=" + std::to_string(extent);
}

TruncationWindow default_window() {
  TruncationWindow w;
  if (const char* env = std::getenv("ADF_WINDOW")) {
    std::string s(env);
    try {
      auto comma = s.find(',');
      w.degree = std::stoi(s.substr(0, comma));
      if (comma != std::string::npos) w.extent = std::stoi(s.substr(comma + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("ADF_WINDOW must be D or D,W");
    }
  }
  validate_window(w);
  return w;
}

void validate_window(const TruncationWindow& w) {
  if (w.degree < 0 || w.extent < 1) throw std::invalid_argument("window needs D >= 0 and W >= 1");
}

std::vector<Exponents> window_monomials(const RingPtr& r, const TruncationWindow& w) {
  std::vector<Exponents> out;
  const std::size_t n = r->num_vars();
  Exponents e(n, 0);
  // Descending lexicographic: larger exponents first in each slot.
  std::function<void(std::size_t, int)> rec = [&](std::size_t v, int left) {
    if (v == n) {
      out.push_back(e);
      return;
    }
    if (r->is_laurent(v)) {
      for (int p = w.extent; p >= -w.extent; --p) {
        e[v] = p;
        rec(v + 1, left);
      }
    } else {
      for (int p = left; p >= 0; --p) {
        e[v] = p;
        rec(v + 1, left - p);
      }
    }
    e[v] = 0;
  };
  rec(0, w.degree);
  return out;
}

bool in_window(const RingPtr& r, const Exponents& e, const TruncationWindow& w) {
  int deg = 0;
  for (std::size_t v = 0; v < e.size(); ++v) {
    if (r->is_laurent(v)) {
      if (e[v] < -w.extent || e[v] > w.extent) return false;
    } else {
      if (e[v] < 0) return false;
      deg += e[v];
    }
  }
  return deg <= w.degree;
}

Cochain to_cochain(const LForm& a) {
  Cochain c;
  for (const auto& [t, f] : a.coefficients())
    for (const auto& [e, q] : f.terms()) c[SliceKey{e, t}] = q;
  return c;
}

LForm from_cochain(const AlgebroidPtr& l, std::size_t degree, const Cochain& c) {
  LForm out(l, degree);
  for (const auto& [k, q] : c)
    if (q != 0) out.add(k.indices, RingElement::monomial(l->base(), k.exps, q));
  return out;
}

WindowedComplex form_complex(const AlgebroidPtr& l) {
  WindowedComplex c;
  c.ring = l->base();
  c.tuples = [n = l->rank()](int p) {
    return p < 0 ? std::vector<IndexTuple>{} : index_tuples(n, static_cast<std::size_t>(p));
  };
  c.differential = [l](int p, const SliceKey& k) {
    LForm a(l, static_cast<std::size_t>(p));
    a.add(k.indices, RingElement::monomial(l->base(), k.exps));
    return to_cochain(d_L(a));
  };
  c.coefficient_degree = l->coefficient_degree();
  c.coefficient_extent = l->coefficient_extent();
  return c;
}

namespace {

void check_against(const WindowedComplex& c, const TruncationWindow& w) {
  validate_window(w);
  bool laurent = false;
  for (std::size_t v = 0; v < c.ring->num_vars(); ++v) laurent = laurent || c.ring->is_laurent(v);
  if (w.degree < c.coefficient_degree || (laurent && w.extent < c.coefficient_extent))
    throw StructuralError("window too small for the coefficient degrees (" + w.to_string() + ")");
}

std::vector<SliceKey> slice_basis(const WindowedComplex& c, int p, const TruncationWindow& w) {
  std::vector<SliceKey> out;
  const auto tuples = c.tuples(p);
  if (tuples.empty()) return out;
  for (const auto& m : window_monomials(c.ring, w))
    for (const auto& t : tuples) out.push_back(SliceKey{m, t});
  return out;
}

std::vector<Cochain> images(const WindowedComplex& c, int p, const std::vector<SliceKey>& basis, Exec exec) {
  return kernels::map_indices<Cochain>(
      basis.size(), [&](std::size_t j) { return c.differential(p, basis[j]); }, exec);
}

/// Column-major matrix from cochains, keeping only rows accepted by `keep`.
template <class Keep>
SparseMatrix assemble(const std::vector<Cochain>& cols, Keep keep, std::map<SliceKey, std::size_t>& rows) {
  for (const auto& col : cols)
    for (const auto& [k, q] : col)
      if (keep(k)) rows.try_emplace(k, 0);
  std::size_t id = 0;
  for (auto& [k, v] : rows) v = id++;
  SparseMatrix m;
  m.rows = rows.size();
  m.cols = cols.size();
  m.columns.reserve(cols.size());
  for (const auto& col : cols) {
    SparseVector sv;
    for (const auto& [k, q] : col) {
      if (!keep(k) || q == 0) continue;
      sv.emplace_back(rows.at(k), q);
    }
    std::sort(sv.begin(), sv.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    m.columns.push_back(std::move(sv));
  }
  return m;
}

}  // namespace

std::vector<DegreeDims> windowed_dims(const WindowedComplex& c, const std::vector<int>& degrees,
                                      const TruncationWindow& w, Exec exec) {
  check_against(c, w);
  std::vector<DegreeDims> out;
  for (int p : degrees) {
    DegreeDims d;
    d.degree = p;
    const auto basis = slice_basis(c, p, w);
    d.cochains = basis.size();
    if (!basis.empty()) {
      std::map<SliceKey, std::size_t> rows;
      auto m = assemble(images(c, p, basis, exec), [](const SliceKey&) { return true; }, rows);
      d.cocycles = basis.size() - sparse_rank(m, exec);
      const auto lower = slice_basis(c, p - 1, w.enlarged(1));
      if (!lower.empty()) {
        const auto cols = images(c, p - 1, lower, exec);
        auto inside = [&](const SliceKey& k) { return in_window(c.ring, k.exps, w); };
        std::map<SliceKey, std::size_t> r_all, r_out;
        auto all = assemble(cols, [](const SliceKey&) { return true; }, r_all);
        auto outside = assemble(cols, [&](const SliceKey& k) { return !inside(k); }, r_out);
        d.coboundaries = sparse_rank(all, exec) - sparse_rank(outside, exec);
      }
    }
    d.cohomology = d.cocycles - d.coboundaries;
    out.push_back(d);
  }
  return out;
}

CohomologyReport windowed_cohomology(const WindowedComplex& c, const std::vector<int>& degrees,
                                     const TruncationWindow& w, Exec exec) {
  CohomologyReport r;
  r.window = w;
  r.dims = windowed_dims(c, degrees, w, exec);
  auto wider = windowed_dims(c, degrees, w.enlarged(2), exec);
  r.stable = true;
  for (std::size_t i = 0; i < r.dims.size(); ++i) r.stable = r.stable && wider[i].cohomology == r.dims[i].cohomology;
  return r;
}

CohomologyReport truncated_cohomology(const AlgebroidPtr& l, const std::vector<int>& degrees,
                                      const TruncationWindow& w, Exec exec) {
  if (!l->verified()) throw StructuralError("cohomology refused: algebroid axioms fail");
  return windowed_cohomology(form_complex(l), degrees, w, exec);
}

std::optional<Cochain> windowed_primitive(const WindowedComplex& c, int p, const Cochain& target,
                                          const TruncationWindow& w, Exec exec) {
  const auto basis = slice_basis(c, p - 1, w.enlarged(1));
  if (basis.empty()) {
    if (target.empty()) return Cochain{};
    return std::nullopt;
  }
  auto cols = images(c, p - 1, basis, exec);
  cols.push_back(target);
  std::map<SliceKey, std::size_t> rows;
  auto m = assemble(cols, [](const SliceKey&) { return true; }, rows);
  SparseVector rhs = std::move(m.columns.back());
  m.columns.pop_back();
  m.cols = basis.size();
  auto x = sparse_solve(m, rhs, exec);
  if (!x) return std::nullopt;
  Cochain out;
  for (std::size_t j = 0; j < basis.size(); ++j)
    if ((*x)[j] != 0) out[basis[j]] = (*x)[j];
  return out;
}

std::string ResidueCertificate::to_string(const Algebroid& l) const {
  std::ostringstream os;
  os << "res = " << algebroid::to_string(value) << " (coefficient of "
     << RingElement::monomial(l.base(), exps).to_string() << " on ";
  for (std::size_t k = 0; k < indices.size(); ++k) os << (k ? " ^ " : "") << l.basis_names()[indices[k]] << "^";
  os << ")";
  return os.str();
}

std::optional<ResidueCertificate> top_degree_residue(const LForm& theta) {
  const auto& l = *theta.owner();
  const auto& r = l.base();
  const std::size_t n = l.rank();
  if (n == 0 || n != r->num_vars() || theta.degree() != n || !l.structure().structure_is_zero()) return std::nullopt;
  Exponents target(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = l.anchor_field(i);
    for (std::size_t v = 0; v < n; ++v)
      if (v != i && !f[v].is_zero()) return std::nullopt;
    if (!f[i].is_monomial()) return std::nullopt;
    const Exponents& e = f[i].terms().begin()->first;
    for (std::size_t v = 0; v < n; ++v)
      if (v != i && e[v] != 0) return std::nullopt;
    if (e[i] == 0 && !r->is_laurent(i)) return std::nullopt;
    if (e[i] != 0 && e[i] != 1) return std::nullopt;
    target[i] = e[i] - 1;
  }
  IndexTuple top(n);
  for (std::size_t i = 0; i < n; ++i) top[i] = static_cast<int>(i);
  Rational c = theta.coefficient(top).coefficient(target);
  if (c == 0) return std::nullopt;
  return ResidueCertificate{top, target, c};
}

ExactnessResult exactness_solve(const LForm& theta, const TruncationWindow& w, Exec exec) {
  const auto& l = theta.owner();
  if (!d_L(theta).is_zero()) throw StructuralError("form is not closed");
  ExactnessResult out;
  out.window = w;
  if (theta.is_zero()) {
    out.status = ExactnessResult::Status::primitive;
    out.primitive = LForm(l, theta.degree() ? theta.degree() - 1 : 0);
    return out;
  }
  if (theta.degree() == 0) {
    // Nothing maps into degree 0.
    const auto& [t, f] = *theta.coefficients().begin();
    const auto& [e, q] = *f.terms().begin();
    out.status = ExactnessResult::Status::obstructed;
    out.residue = ResidueCertificate{t, e, q};
    return out;
  }
  if (auto res = top_degree_residue(theta)) {
    out.status = ExactnessResult::Status::obstructed;
    out.residue = res;
    return out;
  }
  auto c = form_complex(l);
  TruncationWindow used = w;
  used.degree = std::max(used.degree, theta.coefficient_degree());
  used.extent = std::max(used.extent, theta.coefficient_extent());
  check_against(c, used);
  out.window = used;
  auto x = windowed_primitive(c, static_cast<int>(theta.degree()), to_cochain(theta), used, exec);
  if (!x) {
    out.status = ExactnessResult::Status::no_primitive_in_window;
    return out;
  }
  out.status = ExactnessResult::Status::primitive;
  out.primitive = from_cochain(l, theta.degree() - 1, *x);
  return out;
}

}  // namespace algebroid

#include <algebroid/connection.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace algebroid {

Matrix zero_matrix(const RingPtr& r, std::size_t n) { return Matrix(n, std::vector<RingElement>(n, RingElement(r))); }

Matrix identity_matrix(const RingPtr& r, std::size_t n) {
  Matrix m = zero_matrix(r, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = RingElement(r, 1);
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  if (n == 0) return a;
  Matrix m = zero_matrix(a[0][0].ring(), n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k].is_zero()) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (!b[k][j].is_zero()) m[i][j] += a[i][k] * b[k][j];
    }
  return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix m = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m[i][j] += b[i][j];
  return m;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix m = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m[i][j] -= b[i][j];
  return m;
}

Matrix scale(const RingElement& f, const Matrix& a) {
  Matrix m = a;
  for (auto& row : m)
    for (auto& e : row) e = f * e;
  return m;
}

ModuleVector matrix_apply(const Matrix& a, const ModuleVector& v) {
  ModuleVector out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    RingElement s(v.at(0).ring());
    for (std::size_t j = 0; j < v.size(); ++j)
      if (!a[i][j].is_zero() && !v[j].is_zero()) s += a[i][j] * v[j];
    out.push_back(std::move(s));
  }
  return out;
}

RingElement trace(const Matrix& a) {
  RingElement t(a.at(0).at(0).ring());
  for (std::size_t i = 0; i < a.size(); ++i) t += a[i][i];
  return t;
}

bool is_zero(const Matrix& a) {
  for (const auto& row : a)
    for (const auto& e : row)
      if (!e.is_zero()) return false;
  return true;
}

namespace {

RingElement determinant(const Matrix& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  RingElement d(a[0][0].ring());
  for (std::size_t c = 0; c < n; ++c) {
    if (a[0][c].is_zero()) continue;
    Matrix minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<RingElement> row;
      for (std::size_t j = 0; j < n; ++j)
        if (j != c) row.push_back(a[i][j]);
      minor.push_back(std::move(row));
    }
    RingElement t = a[0][c] * determinant(minor);
    if (c % 2) d -= t;
    else d += t;
  }
  return d;
}

}  // namespace

std::optional<Matrix> inverse(const Matrix& a) {
  const std::size_t n = a.size();
  if (n == 0) return a;
  RingElement det = determinant(a);
  if (!det.is_unit()) return std::nullopt;
  RingElement inv = det.inverse();
  if (n == 1) return Matrix{{inv}};
  Matrix out = zero_matrix(det.ring(), n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Matrix minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == j) continue;
        std::vector<RingElement> row;
        for (std::size_t c = 0; c < n; ++c)
          if (c != i) row.push_back(a[r][c]);
        minor.push_back(std::move(row));
      }
      RingElement cof = determinant(minor) * inv;
      out[i][j] = (i + j) % 2 ? -cof : cof;
    }
  return out;
}

std::string to_string(const Matrix& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += i ? ",[" : "[";
    for (std::size_t j = 0; j < a[i].size(); ++j) s += (j ? "," : "") + a[i][j].to_string();
    s += "]";
  }
  return s + "]";
}

// --------------------------------------------------------------- Connection

Connection::Connection(AlgebroidPtr l, std::size_t rank, std::vector<Matrix> components)
    : l_(std::move(l)), rank_(rank), a_(std::move(components)) {
  if (a_.size() != l_->rank()) throw StructuralError("connection needs one matrix per algebroid basis element");
  for (auto& m : a_) {
    if (m.size() != rank_) throw StructuralError("connection matrix has the wrong size");
    for (auto& row : m) {
      if (row.size() != rank_) throw StructuralError("connection matrix has the wrong size");
      for (auto& e : row) {
        if (!e.ring()) e = l_->zero();
        if (e.ring() != l_->base()) throw StructuralError("connection entry outside the base ring");
      }
    }
  }
}

Connection Connection::trivial(AlgebroidPtr l, std::size_t rank) {
  std::vector<Matrix> comps(l->rank(), zero_matrix(l->base(), rank));
  return Connection(std::move(l), rank, std::move(comps));
}

ModuleVector Connection::covariant(std::size_t i, const ModuleVector& s) const {
  ModuleVector out = matrix_apply(a_[i], s);
  for (std::size_t b = 0; b < rank_; ++b) out[b] += apply_field(l_->anchor_field(i), s[b]);
  return out;
}

ModuleVector Connection::covariant(const Section& u, const ModuleVector& s) const {
  ModuleVector out(rank_, l_->zero());
  for (std::size_t i = 0; i < l_->rank(); ++i) {
    if (u.coeffs[i].is_zero()) continue;
    auto v = covariant(i, s);
    for (std::size_t b = 0; b < rank_; ++b) out[b] += u.coeffs[i] * v[b];
  }
  return out;
}

// -------------------------------------------------------------- EValuedForm

EValuedForm EValuedForm::zero(const AlgebroidPtr& l, std::size_t rank, std::size_t degree) {
  return EValuedForm{l, rank, degree, std::vector<LForm>(rank, LForm(l, degree))};
}

EValuedForm EValuedForm::section(const AlgebroidPtr& l, const ModuleVector& s) {
  EValuedForm e = zero(l, s.size(), 0);
  for (std::size_t b = 0; b < s.size(); ++b) e.parts[b] = LForm::function(l, s[b]);
  return e;
}

bool EValuedForm::is_zero() const {
  return std::all_of(parts.begin(), parts.end(), [](const LForm& f) { return f.is_zero(); });
}

bool operator==(const EValuedForm& a, const EValuedForm& b) {
  return a.owner == b.owner && a.rank == b.rank && a.degree == b.degree && a.parts == b.parts;
}

// ---------------------------------------------------------------- curvature

Matrix CurvatureTensor::evaluate(const Section& u, const Section& v) const {
  Matrix m = zero_matrix(owner->base(), rank);
  for (std::size_t i = 0; i < owner->rank(); ++i)
    for (std::size_t j = 0; j < owner->rank(); ++j) {
      if (i == j || u.coeffs[i].is_zero() || v.coeffs[j].is_zero()) continue;
      m = m + scale(u.coeffs[i] * v.coeffs[j], entries[i][j]);
    }
  return m;
}

CurvatureTensor curvature(const Connection& c) {
  const auto& l = *c.algebroid();
  const std::size_t n = l.rank(), r = c.rank();
  CurvatureTensor f{c.algebroid(), r, std::vector<std::vector<Matrix>>(n, std::vector<Matrix>(n, zero_matrix(l.base(), r)))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Matrix& ai = c.component(i);
      const Matrix& aj = c.component(j);
      Matrix m = ai * aj - aj * ai;
      for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = 0; q < r; ++q) {
          m[p][q] += apply_field(l.anchor_field(i), aj[p][q]);
          m[p][q] -= apply_field(l.anchor_field(j), ai[p][q]);
          for (std::size_t k = 0; k < n; ++k)
            if (!l.c(i, j, k).is_zero()) m[p][q] -= l.c(i, j, k) * c.component(k)[p][q];
        }
      f.entries[j][i] = scale(RingElement(l.base(), -1), m);
      f.entries[i][j] = std::move(m);
    }
  return f;
}

std::string FlatnessWitness::to_string(const Algebroid& l) const {
  std::ostringstream os;
  os << "F(" << l.basis_names()[i] << "," << l.basis_names()[j] << ")[" << row + 1 << "," << col + 1
     << "] = " << value.to_string();
  return os.str();
}

namespace {

std::optional<FlatnessWitness> first_nonzero(const CurvatureTensor& f, const LForm* q) {
  const std::size_t n = f.owner->rank();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t p = 0; p < f.rank; ++p)
        for (std::size_t s = 0; s < f.rank; ++s) {
          RingElement v = f(i, j)[p][s];
          if (q && p == s) v -= q->coefficient({static_cast<int>(i), static_cast<int>(j)});
          if (!v.is_zero()) return FlatnessWitness{i, j, p, s, v};
        }
  return std::nullopt;
}

}  // namespace

std::optional<FlatnessWitness> flatness_witness(const Connection& c) { return first_nonzero(curvature(c), nullptr); }

bool is_flat(const Connection& c) { return !flatness_witness(c).has_value(); }

std::optional<FlatnessWitness> curvature_equals(const Connection& c, const LForm& q) {
  if (q.owner() != c.algebroid() || q.degree() != 2) throw StructuralError("expected a 2-form on the connection's algebroid");
  return first_nonzero(curvature(c), &q);
}

EValuedForm extend_connection(const Connection& c, const EValuedForm& omega) {
  if (omega.owner != c.algebroid() || omega.rank != c.rank()) throw StructuralError("form and connection mismatch");
  const auto& l = c.algebroid();
  const std::size_t r = c.rank();
  EValuedForm out = EValuedForm::zero(l, r, omega.degree + 1);
  for (std::size_t b = 0; b < r; ++b) out.parts[b] = d_L(omega.parts[b]);
  // nabla s_a = sum_i e_i^ (x) A_i[b][a] s_b
  for (std::size_t a = 0; a < r; ++a) {
    if (omega.parts[a].is_zero()) continue;
    for (std::size_t b = 0; b < r; ++b) {
      LForm conn(l, 1);
      for (std::size_t i = 0; i < l->rank(); ++i) conn.add({static_cast<int>(i)}, c.component(i)[b][a]);
      if (conn.is_zero()) continue;
      LForm term = wedge(omega.parts[a], conn);
      if (omega.degree % 2) out.parts[b] -= term;
      else out.parts[b] += term;
    }
  }
  return out;
}

LForm chern_trace_form(const Connection& c, int k) {
  const auto& l = c.algebroid();
  const std::size_t n = l->rank();
  auto f = curvature(c);
  LForm out(l, static_cast<std::size_t>(2 * k));
  if (k == 1) {
    for (const auto& t : index_tuples(n, 2)) out.add(t, trace(f(t[0], t[1])));
  } else if (k == 2) {
    // (1/4) sum over permutations of sgn * tr(F(s1,s2) F(s3,s4)).
    for (const auto& t : index_tuples(n, 4)) {
      IndexTuple perm = t;
      RingElement acc = l->zero();
      do {
        IndexTuple q = perm;
        int sign = sort_with_sign(q);
        RingElement v = trace(f(perm[0], perm[1]) * f(perm[2], perm[3]));
        if (sign > 0) acc += v;
        else acc -= v;
      } while (std::next_permutation(perm.begin(), perm.end()));
      out.add(t, Rational(1, 4) * acc);
    }
  } else {
    throw std::invalid_argument("only trace powers k = 1 and k = 2 are supported");
  }
  if (!d_L(out).is_zero()) throw StructuralError("internal: trace form not closed");
  return out;
}

ObstructionResult obstruction_trace_check(const Connection& c, const LForm& q, const TruncationWindow& w,
                                          Exec exec) {
  if (q.owner() != c.algebroid() || q.degree() != 2) throw StructuralError("expected a 2-form on the connection's algebroid");
  if (!d_L(q).is_zero()) throw StructuralError("form is not closed");
  ObstructionResult r{ObstructionResult::Status::consistent, exactness_solve(Rational(static_cast<long>(c.rank())) * q, w, exec)};
  switch (r.exactness.status) {
    case ExactnessResult::Status::primitive: r.status = ObstructionResult::Status::consistent; break;
    case ExactnessResult::Status::obstructed: r.status = ObstructionResult::Status::obstructed; break;
    case ExactnessResult::Status::no_primitive_in_window: r.status = ObstructionResult::Status::obstructed_in_window; break;
  }
  return r;
}

Connection pullback(const Connection& c, const AlgebroidMorphism& psi) {
  if (auto err = psi.check()) throw StructuralError("not a morphism: " + *err);
  if (psi.target != c.algebroid()) throw StructuralError("morphism target is not the connection's algebroid");
  std::vector<Matrix> comps;
  for (const auto& img : psi.images) {
    Matrix m = zero_matrix(c.algebroid()->base(), c.rank());
    for (std::size_t k = 0; k < img.coeffs.size(); ++k)
      if (!img.coeffs[k].is_zero()) m = m + scale(img.coeffs[k], c.component(k));
    comps.push_back(std::move(m));
  }
  return Connection(psi.source, c.rank(), std::move(comps));
}

CurvatureTensor pullback(const CurvatureTensor& f, const AlgebroidMorphism& psi) {
  const std::size_t n = psi.source->rank();
  CurvatureTensor out{psi.source, f.rank,
                      std::vector<std::vector<Matrix>>(n, std::vector<Matrix>(n, zero_matrix(psi.source->base(), f.rank)))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.entries[i][j] = f.evaluate(psi.images[i], psi.images[j]);
  return out;
}

}  // namespace algebroid

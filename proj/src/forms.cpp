#include <algebroid/forms.hpp>

#include <algorithm>

namespace algebroid {

std::vector<IndexTuple> index_tuples(std::size_t n, std::size_t p) {
  std::vector<IndexTuple> out;
  if (p > n) return out;
  IndexTuple t(p);
  for (std::size_t i = 0; i < p; ++i) t[i] = static_cast<int>(i);
  while (true) {
    out.push_back(t);
    std::size_t k = p;
    while (k > 0 && t[k - 1] == static_cast<int>(n - p + k - 1)) --k;
    if (k == 0) break;
    ++t[k - 1];
    for (std::size_t m = k; m < p; ++m) t[m] = t[m - 1] + 1;
  }
  return out;
}

int sort_with_sign(IndexTuple& t) {
  int sign = 1;
  for (std::size_t i = 1; i < t.size(); ++i)
    for (std::size_t j = i; j > 0 && t[j - 1] >= t[j]; --j) {
      if (t[j - 1] == t[j]) return 0;
      std::swap(t[j - 1], t[j]);
      sign = -sign;
    }
  return sign;
}

LForm::LForm(AlgebroidPtr owner, std::size_t degree) : owner_(std::move(owner)), degree_(degree) {
  if (!owner_) throw StructuralError("form without owner");
}

LForm LForm::function(AlgebroidPtr owner, const RingElement& f) {
  LForm a(std::move(owner), 0);
  a.add({}, f);
  return a;
}

LForm LForm::dual(AlgebroidPtr owner, std::size_t i) {
  LForm a(owner, 1);
  a.add({static_cast<int>(i)}, owner->one());
  return a;
}

void LForm::check_owner(const LForm& b) const {
  if (owner_ != b.owner_) throw StructuralError("forms on different algebroids");
  if (degree_ != b.degree_) throw StructuralError("forms of different degree");
}

RingElement LForm::coefficient(const IndexTuple& t) const {
  auto it = coeffs_.find(t);
  return it == coeffs_.end() ? owner_->zero() : it->second;
}

RingElement LForm::value(IndexTuple t) const {
  int s = sort_with_sign(t);
  if (s == 0) return owner_->zero();
  RingElement c = coefficient(t);
  return s > 0 ? c : -c;
}

void LForm::add(IndexTuple t, const RingElement& f) {
  if (t.size() != degree_) throw StructuralError("index tuple length does not match form degree");
  for (int i : t)
    if (i < 0 || static_cast<std::size_t>(i) >= owner_->rank()) throw StructuralError("basis index out of range");
  if (f.is_zero()) return;
  if (f.ring() != owner_->base()) throw StructuralError("coefficient outside the base ring");
  int s = sort_with_sign(t);
  if (s == 0) return;
  auto [it, fresh] = coeffs_.try_emplace(t, owner_->base());
  if (s > 0) it->second += f;
  else it->second -= f;
  if (it->second.is_zero()) coeffs_.erase(it);
}

LForm& LForm::operator+=(const LForm& b) {
  check_owner(b);
  for (const auto& [t, f] : b.coeffs_) add(t, f);
  return *this;
}

LForm& LForm::operator-=(const LForm& b) {
  check_owner(b);
  for (const auto& [t, f] : b.coeffs_) add(t, -f);
  return *this;
}

LForm operator*(const RingElement& f, const LForm& a) {
  LForm out(a.owner_, a.degree_);
  for (const auto& [t, c] : a.coeffs_) out.add(t, f * c);
  return out;
}

LForm operator*(const Rational& c, const LForm& a) {
  LForm out(a.owner_, a.degree_);
  for (const auto& [t, f] : a.coeffs_) out.add(t, c * f);
  return out;
}

bool operator==(const LForm& a, const LForm& b) {
  return a.owner_ == b.owner_ && a.degree_ == b.degree_ && a.coeffs_ == b.coeffs_;
}

int LForm::coefficient_degree() const {
  int d = 0;
  for (const auto& [t, f] : coeffs_) d = std::max(d, f.polynomial_degree());
  return d;
}

int LForm::coefficient_extent() const {
  int d = 0;
  for (const auto& [t, f] : coeffs_) d = std::max(d, f.laurent_extent());
  return d;
}

std::string LForm::to_string() const {
  if (coeffs_.empty()) return "0";
  std::string out;
  const auto& names = owner_->basis_names();
  for (const auto& [t, f] : coeffs_) {
    std::string tuple;
    for (std::size_t k = 0; k < t.size(); ++k) tuple += (k ? " ^ " : "") + names[t[k]] + "^";
    std::string c = f.to_string();
    std::string term;
    if (tuple.empty()) term = c;
    else if (c == "1") term = tuple;
    else if (f.is_monomial()) term = c + "*" + tuple;
    else term = "(" + c + ")*" + tuple;
    if (out.empty()) out = term;
    else if (term[0] == '-') out += " - " + term.substr(1);
    else out += " + " + term;
  }
  return out;
}

LForm d_L_unchecked(const LForm& theta) {
  const auto& l = *theta.owner();
  const std::size_t n = l.rank();
  const std::size_t p = theta.degree();
  LForm out(theta.owner(), p + 1);
  for (const auto& t : index_tuples(n, p + 1)) {
    RingElement acc = l.zero();
    // Anchor terms.
    for (std::size_t k = 0; k <= p; ++k) {
      IndexTuple rest;
      for (std::size_t m = 0; m <= p; ++m)
        if (m != k) rest.push_back(t[m]);
      RingElement v = theta.value(rest);
      if (v.is_zero()) continue;
      RingElement a = apply_field(l.anchor_field(t[k]), v);
      if (k % 2) acc -= a;
      else acc += a;
    }
    // Bracket terms.
    for (std::size_t k = 0; k <= p; ++k)
      for (std::size_t m = k + 1; m <= p; ++m) {
        IndexTuple rest;
        for (std::size_t q = 0; q <= p; ++q)
          if (q != k && q != m) rest.push_back(t[q]);
        for (std::size_t c = 0; c < n; ++c) {
          const RingElement& s = l.c(t[k], t[m], c);
          if (s.is_zero()) continue;
          IndexTuple args{static_cast<int>(c)};
          args.insert(args.end(), rest.begin(), rest.end());
          RingElement v = theta.value(args);
          if (v.is_zero()) continue;
          if ((k + m) % 2) acc -= s * v;
          else acc += s * v;
        }
      }
    out.add(t, acc);
  }
  return out;
}

LForm d_L(const LForm& theta) {
  if (!theta.owner()->verified()) throw StructuralError("d_L refused: algebroid axioms fail");
  return d_L_unchecked(theta);
}

LForm wedge(const LForm& a, const LForm& b) {
  if (a.owner() != b.owner()) throw StructuralError("wedge of forms on different algebroids");
  const std::size_t n = a.owner()->rank();
  const std::size_t deg = a.degree() + b.degree();
  LForm out(a.owner(), deg);
  if (deg > n) return out;
  for (const auto& [s, f] : a.coefficients())
    for (const auto& [t, g] : b.coefficients()) {
      IndexTuple u = s;
      u.insert(u.end(), t.begin(), t.end());
      out.add(u, f * g);
    }
  return out;
}

LForm contract(const LForm& theta, const Section& u) {
  if (u.owner != theta.owner()) throw StructuralError("contraction with a foreign section");
  if (theta.degree() == 0) throw StructuralError("cannot contract a function");
  LForm out(theta.owner(), theta.degree() - 1);
  for (const auto& [t, f] : theta.coefficients())
    for (std::size_t k = 0; k < t.size(); ++k) {
      const RingElement& c = u.coeffs[t[k]];
      if (c.is_zero()) continue;
      IndexTuple rest;
      for (std::size_t m = 0; m < t.size(); ++m)
        if (m != k) rest.push_back(t[m]);
      out.add(rest, k % 2 ? -(c * f) : c * f);
    }
  return out;
}

RingElement evaluate(const LForm& theta, const std::vector<Section>& args) {
  if (args.size() != theta.degree()) throw StructuralError("wrong number of arguments");
  LForm cur = theta;
  for (const auto& u : args) {
    if (cur.degree() == 0) break;
    cur = contract(cur, u);
  }
  return cur.coefficient({});
}

}  // namespace algebroid

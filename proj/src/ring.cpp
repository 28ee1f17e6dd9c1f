#include <algebroid/ring.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace algebroid {

namespace {

void add_term(Terms& t, const Exponents& e, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = t.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) t.erase(it);
  }
}

Exponents add_exponents(const Exponents& a, const Exponents& b) {
  Exponents r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

int total(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

}  // namespace

// ---------------------------------------------------------------- ChartRing

ChartRing::Builder& ChartRing::Builder::name(std::string n) {
  name_ = std::move(n);
  return *this;
}

ChartRing::Builder& ChartRing::Builder::variable(std::string name, bool laurent) {
  vars_.push_back({std::move(name), laurent});
  return *this;
}

ChartRing::Builder& ChartRing::Builder::derivation(std::string name, std::vector<Terms> images) {
  extra_.push_back({std::move(name), std::move(images)});
  return *this;
}

RingPtr ChartRing::Builder::build() const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    for (std::size_t j = i + 1; j < vars_.size(); ++j)
      if (vars_[i].name == vars_[j].name)
        throw StructuralError("duplicate variable name: " + vars_[i].name);
  auto ring = std::shared_ptr<ChartRing>(new ChartRing());
  ring->name_ = name_;
  ring->vars_ = vars_;
  const std::size_t n = vars_.size();
  for (std::size_t i = 0; i < n; ++i) {
    Derivation d;
    d.name = "d/d" + vars_[i].name;
    d.images.resize(n);
    d.images[i][Exponents(n, 0)] = 1;
    ring->derivations_.push_back(std::move(d));
  }
  for (const auto& d : extra_) {
    if (d.images.size() != n) throw StructuralError("derivation " + d.name + ": wrong arity");
    for (const auto& img : d.images)
      for (const auto& [e, c] : img)
        if (!ring->admits(e)) throw StructuralError("derivation " + d.name + ": exponent out of range");
    if (ring->derivation_index(d.name)) throw StructuralError("duplicate derivation " + d.name);
    ring->derivations_.push_back(d);
  }
  return ring;
}

RingPtr ChartRing::polynomial(const std::vector<std::string>& vars, std::string name) {
  Builder b;
  b.name(std::move(name));
  for (const auto& v : vars) b.variable(v, false);
  return b.build();
}

RingPtr ChartRing::laurent(const std::vector<std::string>& vars, std::string name) {
  Builder b;
  b.name(std::move(name));
  for (const auto& v : vars) b.variable(v, true);
  return b.build();
}

bool ChartRing::all_polynomial() const {
  return std::none_of(vars_.begin(), vars_.end(), [](const Variable& v) { return v.laurent; });
}

std::optional<std::size_t> ChartRing::index_of(const std::string& var) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == var) return i;
  return std::nullopt;
}

std::optional<std::size_t> ChartRing::derivation_index(const std::string& name) const {
  for (std::size_t i = 0; i < derivations_.size(); ++i)
    if (derivations_[i].name == name) return i;
  return std::nullopt;
}

bool ChartRing::admits(const Exponents& e) const {
  if (e.size() != vars_.size()) return false;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (!vars_[i].laurent && e[i] < 0) return false;
  return true;
}

// -------------------------------------------------------------- RingElement

RingElement::RingElement(RingPtr ring) : ring_(std::move(ring)) {}

RingElement::RingElement(RingPtr ring, const Rational& constant) : ring_(std::move(ring)) {
  if (constant != 0) terms_[Exponents(ring_->num_vars(), 0)] = constant;
}

RingElement::RingElement(RingPtr ring, Terms terms) : ring_(std::move(ring)) {
  for (auto& [e, c] : terms) {
    if (c == 0) continue;
    if (!ring_->admits(e)) throw StructuralError("exponent violates ring bounds");
    terms_.emplace(e, c);
  }
}

RingElement RingElement::variable(const RingPtr& ring, std::size_t i, int power) {
  Exponents e(ring->num_vars(), 0);
  e.at(i) = power;
  return monomial(ring, std::move(e));
}

RingElement RingElement::monomial(const RingPtr& ring, Exponents e, const Rational& c) {
  Terms t;
  if (c != 0) t.emplace(std::move(e), c);
  return RingElement(ring, std::move(t));
}

bool RingElement::is_constant() const {
  return terms_.empty() ||
         (terms_.size() == 1 && std::all_of(terms_.begin()->first.begin(), terms_.begin()->first.end(),
                                            [](int x) { return x == 0; }));
}

Rational RingElement::constant_term() const {
  return ring_ ? coefficient(Exponents(ring_->num_vars(), 0)) : Rational(0);
}

Rational RingElement::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

int RingElement::polynomial_degree() const {
  if (terms_.empty()) return -1;
  int best = 0;
  for (const auto& [e, c] : terms_) {
    int d = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
      if (!ring_->is_laurent(i)) d += e[i];
    best = std::max(best, d);
  }
  return best;
}

int RingElement::laurent_extent() const {
  int best = 0;
  for (const auto& [e, c] : terms_)
    for (std::size_t i = 0; i < e.size(); ++i)
      if (ring_->is_laurent(i)) best = std::max(best, std::abs(e[i]));
  return best;
}

void RingElement::check_owner(const RingElement& b) const {
  if (ring_ != b.ring_) throw StructuralError("ring element owner mismatch");
}

RingElement& RingElement::operator+=(const RingElement& b) {
  check_owner(b);
  for (const auto& [e, c] : b.terms_) add_term(terms_, e, c);
  return *this;
}

RingElement& RingElement::operator-=(const RingElement& b) {
  check_owner(b);
  for (const auto& [e, c] : b.terms_) add_term(terms_, e, -c);
  return *this;
}

RingElement operator*(const RingElement& a, const RingElement& b) {
  a.check_owner(b);
  RingElement r(a.ring_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) add_term(r.terms_, add_exponents(ea, eb), ca * cb);
  return r;
}

RingElement& RingElement::operator*=(const RingElement& b) {
  *this = *this * b;
  return *this;
}

RingElement& RingElement::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

RingElement RingElement::operator-() const {
  RingElement r = *this;
  for (auto& [e, v] : r.terms_) v = -v;
  return r;
}

bool operator==(const RingElement& a, const RingElement& b) {
  if (a.terms_.empty() && b.terms_.empty()) return true;
  return a.ring_ == b.ring_ && a.terms_ == b.terms_;
}

bool RingElement::is_unit() const {
  if (terms_.size() != 1) return false;
  const auto& e = terms_.begin()->first;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] != 0 && !ring_->is_laurent(i)) return false;
  return true;
}

RingElement RingElement::inverse() const {
  if (!is_unit()) throw StructuralError("element is not a unit: " + to_string());
  const auto& [e, c] = *terms_.begin();
  Exponents inv(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) inv[i] = -e[i];
  return monomial(ring_, std::move(inv), 1 / c);
}

RingElement RingElement::pow(int n) const {
  if (n < 0) return inverse().pow(-n);
  RingElement result(ring_, Rational(1));
  RingElement base = *this;
  while (n > 0) {
    if (n & 1) result *= base;
    n >>= 1;
    if (n) base *= base;
  }
  return result;
}

RingElement RingElement::partial(std::size_t var) const {
  RingElement r(ring_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponents f = e;
    f[var] -= 1;
    add_term(r.terms_, f, c * e[var]);
  }
  return r;
}

RingElement RingElement::apply(const Derivation& d) const {
  RingElement r(ring_);
  for (std::size_t v = 0; v < d.images.size(); ++v) {
    if (d.images[v].empty()) continue;
    RingElement dv = partial(v);
    if (dv.is_zero()) continue;
    r += dv * RingElement(ring_, d.images[v]);
  }
  return r;
}

std::string RingElement::to_string() const {
  if (terms_.empty()) return "0";
  std::vector<const Terms::value_type*> order;
  for (const auto& t : terms_) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) {
    int ta = total(a->first), tb = total(b->first);
    if (ta != tb) return ta > tb;
    return a->first > b->first;
  });
  std::ostringstream os;
  bool first = true;
  for (auto* t : order) {
    Rational c = t->second;
    const bool negative = c < 0;
    if (negative) c = -c;
    if (first) {
      if (negative) os << "-";
    } else {
      os << (negative ? " - " : " + ");
    }
    first = false;
    std::string mono;
    for (std::size_t i = 0; i < t->first.size(); ++i) {
      const int p = t->first[i];
      if (p == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += ring_->var_name(i);
      if (p != 1) mono += "^" + std::to_string(p);
    }
    if (mono.empty()) {
      os << algebroid::to_string(c);
    } else if (c == 1) {
      os << mono;
    } else {
      os << algebroid::to_string(c) << "*" << mono;
    }
  }
  return os.str();
}

RingElement apply_derivation(const std::string& name, const RingElement& f) {
  auto idx = f.ring()->derivation_index(name);
  if (!idx) throw StructuralError("unknown derivation: " + name);
  return f.apply(f.ring()->derivation(*idx));
}

RingElement ring_arith(const RingElement& a, const RingElement& b, char op) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    default: throw std::invalid_argument("unknown ring operation");
  }
}

// ------------------------------------------------------------------ RingMap

RingMap::RingMap(RingPtr source, RingPtr target, std::vector<RingElement> images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
  if (images_.size() != source_->num_vars()) throw StructuralError("ring map: wrong number of images");
  for (std::size_t v = 0; v < images_.size(); ++v) {
    if (images_[v].is_zero()) images_[v] = RingElement(target_);
    if (images_[v].ring() != target_) throw StructuralError("ring map: image not in target ring");
    if (source_->is_laurent(v) && !images_[v].is_unit())
      throw StructuralError("ring map: image of Laurent variable " + source_->var_name(v) + " is not a unit");
  }
}

RingMap RingMap::identity(const RingPtr& ring) {
  std::vector<RingElement> imgs;
  for (std::size_t v = 0; v < ring->num_vars(); ++v) imgs.push_back(RingElement::variable(ring, v));
  return RingMap(ring, ring, std::move(imgs));
}

RingElement RingMap::operator()(const RingElement& f) const {
  if (f.ring() && f.ring() != source_) throw StructuralError("ring map applied outside its source");
  RingElement r(target_);
  for (const auto& [e, c] : f.terms()) {
    RingElement term(target_, c);
    for (std::size_t v = 0; v < e.size(); ++v)
      if (e[v] != 0) term *= images_[v].pow(e[v]);
    r += term;
  }
  return r;
}

bool RingMap::is_monomial() const {
  return std::all_of(images_.begin(), images_.end(), [](const RingElement& x) { return x.is_monomial(); });
}

std::optional<std::vector<std::pair<Rational, std::vector<int>>>> RingMap::monomial_inverse() const {
  const std::size_t n = source_->num_vars();
  if (n != target_->num_vars() || !is_monomial()) return std::nullopt;
  // images_v = c_v * y^{A[v]}; want y_t = prod_v (images_v)^{K[t][v]} / const, i.e. K A = I.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(2 * n, 0));
  for (std::size_t v = 0; v < n; ++v) {
    const auto& e = images_[v].terms().begin()->first;
    for (std::size_t t = 0; t < n; ++t) a[t][v] = e[t];  // transpose: A^T K^T = I
    a[v][n + v] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    Rational p = a[col][col];
    for (auto& x : a[col]) x /= p;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t k = 0; k < 2 * n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  // a[.][n..] now holds (A^T)^{-1} = K^T, so K[t][v] = a[v][n+t].
  std::vector<std::pair<Rational, std::vector<int>>> out;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<int> k(n);
    Rational scale = 1;
    for (std::size_t v = 0; v < n; ++v) {
      const Rational& q = a[v][n + t];
      if (q.get_den() != 1) return std::nullopt;
      k[v] = static_cast<int>(q.get_num().get_si());
      const Rational& c = images_[v].terms().begin()->second;
      Rational cp = 1;
      for (int i = 0; i < std::abs(k[v]); ++i) cp *= c;
      scale *= (k[v] >= 0 ? cp : 1 / cp);
    }
    // y_t = prod images^k / scale
    out.emplace_back(1 / scale, std::move(k));
  }
  return out;
}

RingElement apply_ring_map(const RingMap& m, const RingElement& f) { return m(f); }

}  // namespace algebroid

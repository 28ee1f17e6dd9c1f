#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace algebroid {

/// Exact rational scalar; gmp keeps it canonical (den > 0, gcd = 1).
using Rational = mpq_class;
using Integer = mpz_class;

/// Thrown when operands do not share an owner or violate a structural bound.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Always "num/den", the stable JSON spelling.
inline std::string to_fraction_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Rational parse_rational(std::string_view text) {
  Rational q;
  if (q.set_str(std::string(text), 10) != 0) {
    throw std::invalid_argument("not a rational: " + std::string(text));
  }
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
  q.canonicalize();
  return q;
}

}  // namespace algebroid

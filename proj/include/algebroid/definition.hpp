#pragma once

#include <algebroid/cech.hpp>
#include <algebroid/matched_pair.hpp>

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace algebroid {

struct SourceLoc {
  int line = 1, col = 1;
  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  SourceLoc loc;
  std::string message;
  std::optional<std::string> witness;
  /// "3:14: error: message"
  std::string to_string() const;
};

/// Expression tree.  `x^2` is a power, `e1^` a dual basis element, `a ^ b` a
/// wedge; `d/dx` names a derivation.
struct Expr {
  enum class Kind { number, name, dual, derivation, neg, add, sub, mul, wedge, pow };
  Kind kind = Kind::number;
  Rational value;      // number
  std::string name;    // name, dual, derivation
  int exponent = 0;    // pow
  std::vector<Expr> kids;
  SourceLoc loc;

  friend bool operator==(const Expr& a, const Expr& b);
};

std::string render(const Expr& e);

struct MatrixEntry {
  std::string basis;
  std::vector<std::vector<Expr>> rows;
  SourceLoc loc;
  friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

struct RingDecl {
  std::string name;
  bool laurent = false;
  std::vector<std::string> vars;
  friend bool operator==(const RingDecl&, const RingDecl&) = default;
};

struct AlgebroidDecl {
  enum class Kind { explicit_, tangent, log, trivial, poisson };
  std::string name;
  Kind kind = Kind::explicit_;
  std::string ring;
  std::vector<std::string> basis;                 // explicit
  std::vector<std::pair<std::string, Expr>> anchor;  // explicit: basis -> derivation combination
  struct Bracket {
    std::string a, b;
    Expr value;
    SourceLoc loc;
    friend bool operator==(const Bracket&, const Bracket&) = default;
  };
  std::vector<Bracket> brackets;    // explicit, or poisson entries [x,y] = pi^{xy}
  std::vector<std::string> divisor;  // log
  int rank = 0;                       // trivial
  friend bool operator==(const AlgebroidDecl&, const AlgebroidDecl&) = default;
};

struct FormDecl {
  std::string name, on;
  Expr value;
  friend bool operator==(const FormDecl&, const FormDecl&) = default;
};

struct ConnectionDecl {
  std::string name, on;
  int rank = 0;
  std::vector<MatrixEntry> components;
  friend bool operator==(const ConnectionDecl&, const ConnectionDecl&) = default;
};

struct CoverDecl {
  std::string name;
  std::string algebroid = "tangent";  // tangent | log
  std::optional<int> k;
  friend bool operator==(const CoverDecl&, const CoverDecl&) = default;
};

struct CocycleDecl {
  enum class Kind { explicit_, atiyah, zero };
  std::string name, cover;
  Kind kind = Kind::explicit_;
  struct Entry {
    std::string first, second;  // second empty for Q entries
    Expr value;
    SourceLoc loc;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> phi, q;
  friend bool operator==(const CocycleDecl&, const CocycleDecl&) = default;
};

struct BunchDecl {
  std::string name, cover;
  int rank = 0;
  std::vector<std::pair<std::string, std::vector<MatrixEntry>>> charts;
  friend bool operator==(const BunchDecl&, const BunchDecl&) = default;
};

struct RelationsDecl {
  std::string name, algebroid;
  std::optional<std::string> twist;
  friend bool operator==(const RelationsDecl&, const RelationsDecl&) = default;
};

struct MatchedDecl {
  enum class Kind { split, pair };
  std::string name;
  Kind kind = Kind::split;
  std::vector<std::string> args;  // split: L ; pair: L1, L2, C12, C21
  int n1 = 0;
  friend bool operator==(const MatchedDecl&, const MatchedDecl&) = default;
};

using DeclBody = std::variant<RingDecl, AlgebroidDecl, FormDecl, ConnectionDecl, CoverDecl, CocycleDecl, BunchDecl,
                              RelationsDecl, MatchedDecl>;

struct Declaration {
  DeclBody body;
  SourceLoc loc;
  std::vector<std::string> comments;  // leading '#' lines, kept by render

  const std::string& name() const;
  std::string keyword() const;
  friend bool operator==(const Declaration& a, const Declaration& b) { return a.body == b.body; }
};

struct DefinitionFile {
  std::vector<Declaration> decls;
  friend bool operator==(const DefinitionFile&, const DefinitionFile&) = default;
};

struct ParseResult {
  std::optional<DefinitionFile> file;  // set when there are no errors
  std::vector<Diagnostic> diagnostics;
};

/// Keeps going after an error: recovery skips to the next declaration.
ParseResult parse_definitions(const std::string& text);
/// Canonical text: one blank line between declarations, leading comment
/// lines kept; parse_definitions(render(f)) gives back f.
std::string render(const DefinitionFile& f);

/// Parses a single expression (used for words and command arguments).
std::optional<Expr> parse_expression(const std::string& text, std::vector<Diagnostic>& diags);

/// Objects built from a definition file, by name.
struct Model {
  std::map<std::string, RingPtr> rings;
  std::map<std::string, AlgebroidPtr> algebroids;
  std::map<std::string, LForm> forms;
  std::map<std::string, Connection> connections;
  std::map<std::string, Cover> covers;
  std::map<std::string, std::pair<std::string, CechPair>> cocycles;  // cover name, pair
  std::map<std::string, std::pair<std::string, LocalConnectionBunch>> bunches;
  std::map<std::string, RelationsPtr> relations;
  std::map<std::string, MatchedPairData> matched;
  std::vector<std::pair<std::string, std::string>> order;  // (keyword, name) in declaration order

  /// Last declared name of a kind, for commands given no name.
  std::optional<std::string> last(const std::string& keyword) const;
};

struct BuildResult {
  Model model;
  std::vector<Diagnostic> diagnostics;
};

/// Evaluates every declaration; errors are collected per declaration.
BuildResult build_model(const DefinitionFile& f);

/// Ring expression in the variables of r.
RingElement eval_ring(const Expr& e, const RingPtr& r);
/// Form expression: ring variables and dual basis elements of l.
LForm eval_form(const Expr& e, const AlgebroidPtr& l);
/// Raw word: a product of generators (basis names of the relation system's
/// algebroid) and ring factors.
RawWord eval_word(const Expr& e, const RelationsPtr& r);

/// Thrown by the evaluators; carries the location of the offending node.
class DefinitionError : public std::runtime_error {
 public:
  DefinitionError(SourceLoc loc, const std::string& what) : std::runtime_error(what), loc(loc) {}
  SourceLoc loc;
};

}  // namespace algebroid

#include <algebroid/definition.hpp>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace algebroid {

std::string Diagnostic::to_string() const {
  std::string s = std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " +
                  (severity == Severity::error ? "error: " : "warning: ") + message;
  if (witness) s += "\n  witness: " + *witness;
  return s;
}

bool operator==(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.value == b.value && a.name == b.name && a.exponent == b.exponent && a.kids == b.kids;
}

namespace {

// ---------------------------------------------------------------- lexer

struct Token {
  enum class Kind { ident, number, derivation, punct, arrow, end };
  Kind kind = Kind::end;
  std::string text;
  SourceLoc loc;
  int depth = 0;  // braces open before this token
  std::vector<std::string> comments;  // whole-line comments just before it
};

const std::set<std::string> kKeywords = {"ring",  "algebroid", "form",      "connection", "cover",
                                         "cocycle", "bunch",   "relations", "matched"};

struct Lexed {
  std::vector<Token> tokens;
  std::vector<Diagnostic> diags;
};

Lexed lex(const std::string& s) {
  Lexed out;
  int line = 1, col = 1;
  std::size_t i = 0;
  int depth = 0;
  std::vector<std::string> pending;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      const std::size_t from = i;
      while (i < s.size() && s[i] != '\n') advance(1);
      pending.push_back(s.substr(from, i - from));
      continue;
    }
    Token t;
    t.loc = {line, col};
    t.depth = depth;
    t.comments = std::move(pending);
    pending.clear();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      t.kind = Token::Kind::ident;
      t.text = s.substr(i, j - i);
      if (t.text == "d" && j + 1 < s.size() && s[j] == '/' && s[j + 1] == 'd') {
        std::size_t k = j + 1;
        while (k < s.size() && ident_char(s[k])) ++k;
        t.kind = Token::Kind::derivation;
        t.text = s.substr(i, k - i);
        j = k;
      }
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      t.kind = Token::Kind::number;
      t.text = s.substr(i, j - i);
      advance(j - i);
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      t.kind = Token::Kind::arrow;
      t.text = "->";
      advance(2);
    } else if (std::string("{}()[],;=+-*^/|:").find(c) != std::string::npos) {
      t.kind = Token::Kind::punct;
      t.text = std::string(1, c);
      if (c == '}') {
        if (depth == 0) {
          out.diags.push_back({Diagnostic::Severity::error, t.loc, "unbalanced '}'", std::nullopt});
          advance(1);
          continue;
        }
        t.depth = --depth;
      }
      if (c == '{') ++depth;
      advance(1);
    } else {
      out.diags.push_back(
          {Diagnostic::Severity::error, t.loc, std::string("unexpected character '") + c + "'", std::nullopt});
      advance(1);
      continue;
    }
    out.tokens.push_back(std::move(t));
  }
  Token end;
  end.loc = {line, col};
  end.depth = depth;
  out.tokens.push_back(end);
  return out;
}

// ---------------------------------------------------------------- parser

struct ParseError {
  SourceLoc loc;
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  const Token& peek(std::size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::end; }
  bool is(const std::string& punct, std::size_t k = 0) const {
    const auto& t = peek(k);
    return (t.kind == Token::Kind::punct || t.kind == Token::Kind::arrow) && t.text == punct;
  }
  bool is_word(const std::string& w) const { return peek().kind == Token::Kind::ident && peek().text == w; }
  /// No whitespace between token k and the one before it.
  bool attached(std::size_t k) const {
    if (p_ + k == 0 || p_ + k >= t_.size()) return false;
    const auto& a = t_[p_ + k - 1];
    const auto& b = t_[p_ + k];
    return a.loc.line == b.loc.line && a.loc.col + static_cast<int>(a.text.size()) == b.loc.col;
  }
  Token take() { return t_[std::min(p_++, t_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& what) const {
    const auto& t = peek();
    std::string got = t.kind == Token::Kind::end ? "end of input" : "'" + t.text + "'";
    throw ParseError{t.loc, "expected " + what + ", found " + got};
  }
  void expect(const std::string& punct) {
    if (!is(punct)) fail("'" + punct + "'");
    take();
  }
  void expect_word(const std::string& w) {
    if (!is_word(w)) fail("'" + w + "'");
    take();
  }
  std::string name(const std::string& what = "a name") {
    if (peek().kind != Token::Kind::ident) fail(what);
    return take().text;
  }
  int integer() {
    bool neg = false;
    if (is("-")) {
      take();
      neg = true;
    }
    if (peek().kind != Token::Kind::number) fail("an integer");
    int v = std::stoi(take().text);
    return neg ? -v : v;
  }
  void close_block() {
    if (!is("}")) {
      const auto& t = peek();
      if (t.kind == Token::Kind::end) throw ParseError{t.loc, "unbalanced '{': block not closed before end of input"};
      fail("'}'");
    }
    take();
  }

  /// Skips to the next declaration keyword at depth 0 or at the start of a line.
  void recover() {
    if (!at_end()) take();
    while (!at_end()) {
      const auto& t = peek();
      if (t.kind == Token::Kind::ident && kKeywords.count(t.text) && (t.depth == 0 || t.loc.col == 1)) return;
      take();
    }
  }

  // expressions
  Expr expr() {
    Expr e = term();
    while (is("+") || is("-")) {
      auto op = take();
      Expr r = term();
      Expr n;
      n.kind = op.text == "+" ? Expr::Kind::add : Expr::Kind::sub;
      n.loc = op.loc;
      n.kids = {std::move(e), std::move(r)};
      e = std::move(n);
    }
    return e;
  }
  Expr term() {
    Expr e = factor();
    while (is("*") || is("^")) {
      auto op = take();
      Expr r = factor();
      Expr n;
      n.kind = op.text == "*" ? Expr::Kind::mul : Expr::Kind::wedge;
      n.loc = op.loc;
      n.kids = {std::move(e), std::move(r)};
      e = std::move(n);
    }
    return e;
  }
  Expr factor() {
    if (is("-")) {
      auto op = take();
      Expr n;
      n.kind = Expr::Kind::neg;
      n.loc = op.loc;
      n.kids = {factor()};
      return n;
    }
    return power();
  }
  // x^2 and x^-2 are powers only when written without spaces; e1^ - 2 is a dual
  bool exponent_follows() const {
    if (!is("^") || !attached(0) || !attached(1)) return false;
    return peek(1).kind == Token::Kind::number || (is("-", 1) && attached(2) && peek(2).kind == Token::Kind::number);
  }
  Expr power() {
    Expr base;
    const auto& t = peek();
    base.loc = t.loc;
    if (t.kind == Token::Kind::number) {
      Integer num(take().text);
      Integer den = 1;
      if (is("/")) {
        take();
        if (peek().kind != Token::Kind::number) fail("a denominator");
        den = Integer(take().text);
        if (den == 0) throw ParseError{base.loc, "zero denominator"};
      }
      base.kind = Expr::Kind::number;
      base.value = Rational(num, den);
      base.value.canonicalize();
    } else if (t.kind == Token::Kind::derivation) {
      base.kind = Expr::Kind::derivation;
      base.name = take().text;
    } else if (t.kind == Token::Kind::ident) {
      base.name = take().text;
      base.kind = Expr::Kind::name;
      if (is("^") && attached(0) && !exponent_follows()) {
        take();
        base.kind = Expr::Kind::dual;
        return base;
      }
    } else if (is("(")) {
      take();
      base = expr();
      expect(")");
    } else {
      fail("an expression");
    }
    if (exponent_follows()) {
      auto op = take();
      Expr n;
      n.kind = Expr::Kind::pow;
      n.loc = op.loc;
      n.exponent = integer();
      n.kids = {std::move(base)};
      return n;
    }
    return base;
  }

  std::vector<std::vector<Expr>> matrix() {
    std::vector<std::vector<Expr>> rows;
    expect("[");
    do {
      expect("[");
      std::vector<Expr> row;
      row.push_back(expr());
      while (is(",")) {
        take();
        row.push_back(expr());
      }
      expect("]");
      rows.push_back(std::move(row));
    } while (is(",") && (take(), true));
    expect("]");
    return rows;
  }

  std::vector<MatrixEntry> matrix_entries() {
    std::vector<MatrixEntry> out;
    while (!is("}") && !at_end()) {
      MatrixEntry m;
      m.loc = peek().loc;
      m.basis = name("a basis element");
      expect("->");
      m.rows = matrix();
      expect(";");
      out.push_back(std::move(m));
    }
    return out;
  }

  Declaration declaration() {
    Declaration d;
    d.loc = peek().loc;
    d.comments = peek().comments;
    if (peek().kind != Token::Kind::ident || !kKeywords.count(peek().text)) fail("a declaration keyword");
    const std::string kw = take().text;
    if (kw == "ring") d.body = ring();
    else if (kw == "algebroid") d.body = algebroid();
    else if (kw == "form") d.body = form();
    else if (kw == "connection") d.body = connection();
    else if (kw == "cover") d.body = cover();
    else if (kw == "cocycle") d.body = cocycle();
    else if (kw == "bunch") d.body = bunch();
    else if (kw == "relations") d.body = relations();
    else d.body = matched();
    return d;
  }

  RingDecl ring() {
    RingDecl r;
    r.name = name();
    expect("=");
    if (is_word("poly")) {
      take();
    } else if (is_word("laurent")) {
      take();
      r.laurent = true;
    } else {
      fail("'poly' or 'laurent'");
    }
    expect("(");
    expect_word("Q");
    if (is(";")) {
      take();
      r.vars.push_back(name("a variable"));
      while (is(",")) {
        take();
        r.vars.push_back(name("a variable"));
      }
    }
    expect(")");
    if (is(";")) take();
    return r;
  }

  AlgebroidDecl algebroid() {
    AlgebroidDecl a;
    a.name = name();
    if (is_word("over")) {
      take();
      a.ring = name("a ring");
      expect("{");
      while (!is("}") && !at_end()) {
        if (is_word("basis")) {
          take();
          a.basis.push_back(name("a basis name"));
          while (is(",")) {
            take();
            a.basis.push_back(name("a basis name"));
          }
        } else if (is_word("anchor")) {
          take();
          do {
            auto b = name("a basis element");
            expect("->");
            a.anchor.emplace_back(b, expr());
          } while (is(",") && (take(), true));
        } else if (is_word("bracket")) {
          take();
          do {
            a.brackets.push_back(bracket_entry());
          } while (is(",") && (take(), true));
        } else {
          fail("'basis', 'anchor' or 'bracket'");
        }
        expect(";");
      }
      close_block();
      return a;
    }
    expect("=");
    auto kind = name("an algebroid constructor");
    expect("(");
    a.ring = name("a ring");
    if (kind == "tangent") {
      a.kind = AlgebroidDecl::Kind::tangent;
    } else if (kind == "log") {
      a.kind = AlgebroidDecl::Kind::log;
      expect(";");
      a.divisor.push_back(name("a variable"));
      while (is(",")) {
        take();
        a.divisor.push_back(name("a variable"));
      }
    } else if (kind == "trivial") {
      a.kind = AlgebroidDecl::Kind::trivial;
      expect(";");
      a.rank = integer();
    } else if (kind == "poisson") {
      a.kind = AlgebroidDecl::Kind::poisson;
    } else {
      throw ParseError{peek().loc, "unknown algebroid constructor '" + kind + "'"};
    }
    expect(")");
    if (a.kind == AlgebroidDecl::Kind::poisson) {
      expect("{");
      while (!is("}") && !at_end()) {
        a.brackets.push_back(bracket_entry());
        expect(";");
      }
      close_block();
    } else {
      expect(";");
    }
    return a;
  }

  AlgebroidDecl::Bracket bracket_entry() {
    AlgebroidDecl::Bracket b;
    b.loc = peek().loc;
    expect("[");
    b.a = name();
    expect(",");
    b.b = name();
    expect("]");
    expect("=");
    b.value = expr();
    return b;
  }

  FormDecl form() {
    FormDecl f;
    f.name = name();
    expect_word("on");
    f.on = name("an algebroid");
    expect("=");
    f.value = expr();
    expect(";");
    return f;
  }

  ConnectionDecl connection() {
    ConnectionDecl c;
    c.name = name();
    expect_word("on");
    c.on = name("an algebroid");
    expect_word("rank");
    c.rank = integer();
    expect("{");
    c.components = matrix_entries();
    close_block();
    return c;
  }

  CoverDecl cover() {
    CoverDecl c;
    c.name = name();
    expect("=");
    expect_word("p1");
    expect("(");
    while (!is(")")) {
      auto key = name("'k' or 'algebroid'");
      expect("=");
      if (key == "k") {
        c.k = integer();
      } else if (key == "algebroid") {
        c.algebroid = name("'tangent' or 'log'");
      } else {
        throw ParseError{peek().loc, "unknown cover option '" + key + "'"};
      }
      if (!is(",")) break;
      take();
    }
    expect(")");
    expect(";");
    return c;
  }

  CocycleDecl cocycle() {
    CocycleDecl c;
    c.name = name();
    if (is("=")) {
      take();
      auto kind = name("'atiyah' or 'zero'");
      if (kind == "atiyah") c.kind = CocycleDecl::Kind::atiyah;
      else if (kind == "zero") c.kind = CocycleDecl::Kind::zero;
      else throw ParseError{peek().loc, "unknown cocycle constructor '" + kind + "'"};
      expect("(");
      c.cover = name("a cover");
      expect(")");
      expect(";");
      return c;
    }
    expect_word("on");
    c.cover = name("a cover");
    expect("{");
    while (!is("}") && !at_end()) {
      CocycleDecl::Entry e;
      e.loc = peek().loc;
      if (is_word("phi")) {
        take();
        e.first = name("a chart");
        expect("|");
        e.second = name("a chart");
        expect("=");
        e.value = expr();
        c.phi.push_back(std::move(e));
      } else if (is_word("Q")) {
        take();
        e.first = name("a chart");
        expect("=");
        e.value = expr();
        c.q.push_back(std::move(e));
      } else {
        fail("'phi' or 'Q'");
      }
      expect(";");
    }
    close_block();
    return c;
  }

  BunchDecl bunch() {
    BunchDecl b;
    b.name = name();
    expect_word("on");
    b.cover = name("a cover");
    expect_word("rank");
    b.rank = integer();
    expect("{");
    while (!is("}") && !at_end()) {
      auto chart = name("a chart");
      expect("{");
      auto entries = matrix_entries();
      close_block();
      b.charts.emplace_back(chart, std::move(entries));
    }
    close_block();
    return b;
  }

  RelationsDecl relations() {
    RelationsDecl r;
    r.name = name();
    expect("=");
    expect_word("sridharan");
    expect("(");
    r.algebroid = name("an algebroid");
    if (is(",")) {
      take();
      r.twist = name("a form");
    }
    expect(")");
    expect(";");
    return r;
  }

  MatchedDecl matched() {
    MatchedDecl m;
    m.name = name();
    expect("=");
    auto kind = name("'split' or 'pair'");
    expect("(");
    if (kind == "split") {
      m.kind = MatchedDecl::Kind::split;
      m.args.push_back(name("an algebroid"));
      expect(",");
      m.n1 = integer();
    } else if (kind == "pair") {
      m.kind = MatchedDecl::Kind::pair;
      for (int k = 0; k < 4; ++k) {
        if (k) expect(",");
        m.args.push_back(name());
      }
    } else {
      throw ParseError{peek().loc, "unknown matched-pair constructor '" + kind + "'"};
    }
    expect(")");
    expect(";");
    return m;
  }

 private:
  std::vector<Token> t_;
  std::size_t p_ = 0;
};

// ---------------------------------------------------------------- renderer

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::add:
    case Expr::Kind::sub:
      return 1;
    case Expr::Kind::mul:
    case Expr::Kind::wedge:
      return 2;
    case Expr::Kind::neg:
      return 3;
    case Expr::Kind::pow:
      return 4;
    default:
      return 5;
  }
}

std::string render_at(const Expr& e, int need) {
  std::string s;
  switch (e.kind) {
    case Expr::Kind::number:
      s = to_string(e.value);
      break;
    case Expr::Kind::name:
    case Expr::Kind::derivation:
      s = e.name;
      break;
    case Expr::Kind::dual:
      s = e.name + "^";
      break;
    case Expr::Kind::neg:
      s = "-" + render_at(e.kids[0], 3);
      break;
    case Expr::Kind::pow:
      s = render_at(e.kids[0], 5) + "^" + std::to_string(e.exponent);
      if ((e.kids[0].kind == Expr::Kind::number && e.kids[0].value.get_den() != 1) || e.kids[0].kind == Expr::Kind::dual)
        s = "(" + render_at(e.kids[0], 0) + ")^" + std::to_string(e.exponent);
      break;
    default: {
      const int p = precedence(e);
      const char* op = e.kind == Expr::Kind::add ? " + " : e.kind == Expr::Kind::sub ? " - "
                       : e.kind == Expr::Kind::mul                                   ? " * "
                                                                                     : " ^ ";
      s = render_at(e.kids[0], p) + op + render_at(e.kids[1], p + 1);
    }
  }
  return precedence(e) < need ? "(" + s + ")" : s;
}

std::string join(const std::vector<std::string>& v, const std::string& sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string render_matrix(const std::vector<std::vector<Expr>>& rows) {
  std::vector<std::string> rs;
  for (const auto& r : rows) {
    std::vector<std::string> es;
    for (const auto& e : r) es.push_back(render(e));
    rs.push_back("[" + join(es) + "]");
  }
  return "[" + join(rs) + "]";
}

void render_entries(std::ostringstream& os, const std::vector<MatrixEntry>& es, const std::string& indent) {
  for (const auto& m : es) os << indent << m.basis << " -> " << render_matrix(m.rows) << ";\n";
}

struct DeclRenderer {
  std::ostringstream& os;
  void operator()(const RingDecl& r) const {
    os << "ring " << r.name << " = " << (r.laurent ? "laurent" : "poly") << "(Q" << (r.vars.empty() ? "" : "; ")
       << join(r.vars) << ");\n";
  }
  void operator()(const AlgebroidDecl& a) const {
    using K = AlgebroidDecl::Kind;
    auto bracket = [&](const AlgebroidDecl::Bracket& b) {
      return "[" + b.a + ", " + b.b + "] = " + render(b.value);
    };
    switch (a.kind) {
      case K::tangent:
        os << "algebroid " << a.name << " = tangent(" << a.ring << ");\n";
        return;
      case K::log:
        os << "algebroid " << a.name << " = log(" << a.ring << "; " << join(a.divisor) << ");\n";
        return;
      case K::trivial:
        os << "algebroid " << a.name << " = trivial(" << a.ring << "; " << a.rank << ");\n";
        return;
      case K::poisson:
        os << "algebroid " << a.name << " = poisson(" << a.ring << ") {\n";
        for (const auto& b : a.brackets) os << "  " << bracket(b) << ";\n";
        os << "}\n";
        return;
      case K::explicit_:
        break;
    }
    os << "algebroid " << a.name << " over " << a.ring << " {\n";
    os << "  basis " << join(a.basis) << ";\n";
    if (!a.anchor.empty()) {
      std::vector<std::string> parts;
      for (const auto& [b, e] : a.anchor) parts.push_back(b + " -> " + render(e));
      os << "  anchor " << join(parts) << ";\n";
    }
    for (const auto& b : a.brackets) os << "  bracket " << bracket(b) << ";\n";
    os << "}\n";
  }
  void operator()(const FormDecl& f) const { os << "form " << f.name << " on " << f.on << " = " << render(f.value) << ";\n"; }
  void operator()(const ConnectionDecl& c) const {
    os << "connection " << c.name << " on " << c.on << " rank " << c.rank << " {\n";
    render_entries(os, c.components, "  ");
    os << "}\n";
  }
  void operator()(const CoverDecl& c) const {
    os << "cover " << c.name << " = p1(";
    if (c.k) os << "k=" << *c.k << ", ";
    os << "algebroid=" << c.algebroid << ");\n";
  }
  void operator()(const CocycleDecl& c) const {
    if (c.kind != CocycleDecl::Kind::explicit_) {
      os << "cocycle " << c.name << " = " << (c.kind == CocycleDecl::Kind::atiyah ? "atiyah" : "zero") << "("
         << c.cover << ");\n";
      return;
    }
    os << "cocycle " << c.name << " on " << c.cover << " {\n";
    for (const auto& e : c.phi) os << "  phi " << e.first << "|" << e.second << " = " << render(e.value) << ";\n";
    for (const auto& e : c.q) os << "  Q " << e.first << " = " << render(e.value) << ";\n";
    os << "}\n";
  }
  void operator()(const BunchDecl& b) const {
    os << "bunch " << b.name << " on " << b.cover << " rank " << b.rank << " {\n";
    for (const auto& [chart, es] : b.charts) {
      os << "  " << chart << " {\n";
      render_entries(os, es, "    ");
      os << "  }\n";
    }
    os << "}\n";
  }
  void operator()(const RelationsDecl& r) const {
    os << "relations " << r.name << " = sridharan(" << r.algebroid << (r.twist ? ", " + *r.twist : "") << ");\n";
  }
  void operator()(const MatchedDecl& m) const {
    if (m.kind == MatchedDecl::Kind::split)
      os << "matched " << m.name << " = split(" << m.args[0] << ", " << m.n1 << ");\n";
    else
      os << "matched " << m.name << " = pair(" << join(m.args) << ");\n";
  }
};

}  // namespace

std::string render(const Expr& e) { return render_at(e, 0); }

std::string render(const DefinitionFile& f) {
  std::ostringstream os;
  for (std::size_t i = 0; i < f.decls.size(); ++i) {
    if (i) os << "\n";
    for (const auto& c : f.decls[i].comments) os << c << "\n";
    std::visit(DeclRenderer{os}, f.decls[i].body);
  }
  return os.str();
}

const std::string& Declaration::name() const {
  return std::visit([](const auto& b) -> const std::string& { return b.name; }, body);
}

std::string Declaration::keyword() const {
  static const char* names[] = {"ring", "algebroid", "form", "connection", "cover",
                                "cocycle", "bunch", "relations", "matched"};
  return names[body.index()];
}

ParseResult parse_definitions(const std::string& text) {
  auto lexed = lex(text);
  ParseResult res;
  res.diagnostics = std::move(lexed.diags);
  Parser p(std::move(lexed.tokens));
  DefinitionFile f;
  while (!p.at_end()) {
    try {
      f.decls.push_back(p.declaration());
    } catch (const ParseError& e) {
      res.diagnostics.push_back({Diagnostic::Severity::error, e.loc, e.message, std::nullopt});
      p.recover();
    }
  }
  if (res.diagnostics.empty()) res.file = std::move(f);
  return res;
}

std::optional<Expr> parse_expression(const std::string& text, std::vector<Diagnostic>& diags) {
  auto lexed = lex(text);
  for (auto& d : lexed.diags) diags.push_back(d);
  if (!lexed.diags.empty()) return std::nullopt;
  Parser p(std::move(lexed.tokens));
  try {
    auto e = p.expr();
    if (!p.at_end()) p.fail("end of expression");
    return e;
  } catch (const ParseError& e) {
    diags.push_back({Diagnostic::Severity::error, e.loc, e.message, std::nullopt});
    return std::nullopt;
  }
}

// ---------------------------------------------------------------- evaluation

namespace {

[[noreturn]] void bad(const Expr& e, const std::string& what) { throw DefinitionError(e.loc, what); }

/// A linear combination of named atoms plus a scalar part.
struct Linear {
  RingElement scalar;
  std::map<std::string, RingElement> atoms;
  bool has_atoms() const { return !atoms.empty(); }
};

Linear eval_linear(const Expr& e, const RingPtr& r, Expr::Kind atom_kind, const std::set<std::string>& atom_names) {
  auto rec = [&](const Expr& x) { return eval_linear(x, r, atom_kind, atom_names); };
  Linear out{RingElement(r), {}};
  switch (e.kind) {
    case Expr::Kind::number:
      out.scalar = RingElement(r, e.value);
      return out;
    case Expr::Kind::name:
    case Expr::Kind::derivation:
      if (e.kind == atom_kind && atom_names.count(e.name)) {
        out.atoms[e.name] = RingElement(r, Rational(1));
        return out;
      }
      if (e.kind == Expr::Kind::name) {
        if (auto v = r->index_of(e.name)) {
          out.scalar = RingElement::variable(r, *v);
          return out;
        }
        bad(e, "unknown name '" + e.name + "'");
      }
      bad(e, "unknown derivation '" + e.name + "'");
    case Expr::Kind::dual:
      bad(e, "dual basis element '" + e.name + "^' is not allowed here");
    case Expr::Kind::wedge:
      bad(e, "wedge is not allowed here");
    case Expr::Kind::neg: {
      auto a = rec(e.kids[0]);
      a.scalar = -a.scalar;
      for (auto& [k, v] : a.atoms) v = -v;
      return a;
    }
    case Expr::Kind::add:
    case Expr::Kind::sub: {
      auto a = rec(e.kids[0]);
      auto b = rec(e.kids[1]);
      const bool plus = e.kind == Expr::Kind::add;
      a.scalar = plus ? a.scalar + b.scalar : a.scalar - b.scalar;
      for (auto& [k, v] : b.atoms) {
        auto it = a.atoms.try_emplace(k, RingElement(r)).first;
        it->second = plus ? it->second + v : it->second - v;
        if (it->second.is_zero()) a.atoms.erase(it);
      }
      return a;
    }
    case Expr::Kind::mul: {
      auto a = rec(e.kids[0]);
      auto b = rec(e.kids[1]);
      if (a.has_atoms() && b.has_atoms()) bad(e, "product of two non-scalar terms");
      if (b.has_atoms()) std::swap(a, b);
      Linear m{a.scalar * b.scalar, {}};
      for (auto& [k, v] : a.atoms) {
        auto p = v * b.scalar;
        if (!p.is_zero()) m.atoms[k] = p;
      }
      return m;
    }
    case Expr::Kind::pow: {
      auto a = rec(e.kids[0]);
      if (a.has_atoms()) bad(e, "power of a non-scalar term");
      try {
        out.scalar = a.scalar.pow(e.exponent);
      } catch (const StructuralError& err) {
        bad(e, err.what());
      }
      return out;
    }
  }
  bad(e, "malformed expression");
}

std::set<std::string> names_of(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

RingElement eval_ring(const Expr& e, const RingPtr& r) {
  auto v = eval_linear(e, r, Expr::Kind::number, {});
  return v.scalar;
}

LForm eval_form(const Expr& e, const AlgebroidPtr& l) {
  const auto& r = l->base();
  const auto& names = l->basis_names();
  switch (e.kind) {
    case Expr::Kind::number:
      return LForm::function(l, RingElement(r, e.value));
    case Expr::Kind::name: {
      if (auto v = r->index_of(e.name)) return LForm::function(l, RingElement::variable(r, *v));
      if (std::find(names.begin(), names.end(), e.name) != names.end())
        bad(e, "write '" + e.name + "^' for the dual basis element");
      bad(e, "unknown name '" + e.name + "'");
    }
    case Expr::Kind::dual: {
      auto it = std::find(names.begin(), names.end(), e.name);
      if (it == names.end()) bad(e, "'" + e.name + "' is not a basis element of " + l->name());
      return LForm::dual(l, static_cast<std::size_t>(it - names.begin()));
    }
    case Expr::Kind::derivation:
      bad(e, "derivation '" + e.name + "' is not allowed in a form");
    case Expr::Kind::neg:
      return Rational(-1) * eval_form(e.kids[0], l);
    case Expr::Kind::add:
    case Expr::Kind::sub: {
      auto a = eval_form(e.kids[0], l);
      auto b = eval_form(e.kids[1], l);
      if (a.degree() != b.degree()) {
        if (a.is_zero()) a = LForm(l, b.degree());
        else if (b.is_zero()) b = LForm(l, a.degree());
        else bad(e, "sum of forms of degrees " + std::to_string(a.degree()) + " and " + std::to_string(b.degree()));
      }
      return e.kind == Expr::Kind::add ? a + b : a - b;
    }
    case Expr::Kind::mul:
    case Expr::Kind::wedge:
      return wedge(eval_form(e.kids[0], l), eval_form(e.kids[1], l));
    case Expr::Kind::pow: {
      auto a = eval_form(e.kids[0], l);
      if (a.degree() != 0) bad(e, "power of a form of positive degree");
      try {
        return LForm::function(l, a.coefficient({}).pow(e.exponent));
      } catch (const StructuralError& err) {
        bad(e, err.what());
      }
    }
  }
  bad(e, "malformed expression");
}

namespace {

LForm eval_form_degree(const Expr& e, const AlgebroidPtr& l, std::size_t p) {
  auto f = eval_form(e, l);
  if (f.degree() != p) {
    if (f.is_zero()) return LForm(l, p);
    bad(e, "expected a " + std::to_string(p) + "-form, got degree " + std::to_string(f.degree()));
  }
  return f;
}

void flatten_product(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == Expr::Kind::mul) {
    flatten_product(e.kids[0], out);
    flatten_product(e.kids[1], out);
  } else {
    out.push_back(&e);
  }
}

}  // namespace

RawWord eval_word(const Expr& e, const RelationsPtr& r) {
  std::vector<const Expr*> factors;
  flatten_product(e, factors);
  const auto& names = r->algebroid()->basis_names();
  RawWord w;
  for (const auto* f : factors) {
    if (f->kind == Expr::Kind::name) {
      auto it = std::find(names.begin(), names.end(), f->name);
      if (it != names.end()) {
        w.push_back(Letter::gen(static_cast<std::size_t>(it - names.begin())));
        continue;
      }
    }
    w.push_back(Letter::ring(eval_ring(*f, r->ring())));
  }
  return w;
}

std::optional<std::string> Model::last(const std::string& keyword) const {
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (it->first == keyword) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------- model

namespace {

struct Builder {
  Model& m;
  std::vector<Diagnostic>& diags;
  std::set<std::string> failed;
  SourceLoc here;

  struct Skip {};  // a dependency failed earlier; stay quiet

  template <class Map>
  const typename Map::mapped_type& lookup(const Map& map, const std::string& name, const std::string& what) {
    auto it = map.find(name);
    if (it != map.end()) return it->second;
    if (failed.count(name)) throw Skip{};
    throw DefinitionError(here, "unknown " + what + " '" + name + "'");
  }

  Matrix matrix(const MatrixEntry& me, const RingPtr& r, std::size_t rank) {
    if (me.rows.size() != rank) throw DefinitionError(me.loc, "matrix must have " + std::to_string(rank) + " rows");
    Matrix a;
    for (const auto& row : me.rows) {
      if (row.size() != rank)
        throw DefinitionError(me.loc, "matrix must have " + std::to_string(rank) + " columns");
      std::vector<RingElement> rr;
      for (const auto& e : row) rr.push_back(eval_ring(e, r));
      a.push_back(std::move(rr));
    }
    return a;
  }

  Connection connection_from(const AlgebroidPtr& l, int rank, const std::vector<MatrixEntry>& entries) {
    if (rank < 0) throw DefinitionError(here, "rank must be nonnegative");
    const auto r = static_cast<std::size_t>(rank);
    std::vector<Matrix> comps(l->rank(), zero_matrix(l->base(), r));
    std::set<std::string> seen;
    for (const auto& me : entries) {
      const auto& names = l->basis_names();
      auto it = std::find(names.begin(), names.end(), me.basis);
      if (it == names.end()) throw DefinitionError(me.loc, "'" + me.basis + "' is not a basis element of " + l->name());
      if (!seen.insert(me.basis).second) throw DefinitionError(me.loc, "component for '" + me.basis + "' given twice");
      comps[static_cast<std::size_t>(it - names.begin())] = matrix(me, l->base(), r);
    }
    return Connection(l, r, std::move(comps));
  }

  void operator()(const RingDecl& d) {
    std::set<std::string> seen;
    ChartRing::Builder b;
    b.name(d.name);
    for (const auto& v : d.vars) {
      if (!seen.insert(v).second) throw DefinitionError(here, "variable '" + v + "' declared twice");
      b.variable(v, d.laurent);
    }
    m.rings[d.name] = b.build();
  }

  void operator()(const AlgebroidDecl& d) {
    const auto& r = lookup(m.rings, d.ring, "ring");
    using K = AlgebroidDecl::Kind;
    switch (d.kind) {
      case K::tangent:
        m.algebroids[d.name] = rename(make_tangent(r), d.name);
        return;
      case K::trivial:
        if (d.rank < 0) throw DefinitionError(here, "rank must be nonnegative");
        m.algebroids[d.name] = rename(make_trivial_bundle(r, static_cast<std::size_t>(d.rank)), d.name);
        return;
      case K::log: {
        std::vector<std::size_t> vars;
        for (const auto& v : d.divisor) {
          auto i = r->index_of(v);
          if (!i) throw DefinitionError(here, "unknown variable '" + v + "'");
          vars.push_back(*i);
        }
        m.algebroids[d.name] = rename(make_log(r, vars), d.name);
        return;
      }
      case K::poisson: {
        const std::size_t n = r->num_vars();
        std::vector<std::vector<RingElement>> pi(n, std::vector<RingElement>(n, RingElement(r)));
        for (const auto& b : d.brackets) {
          auto i = r->index_of(b.a), j = r->index_of(b.b);
          if (!i || !j) throw DefinitionError(b.loc, "bivector entries are indexed by variables");
          auto v = eval_ring(b.value, r);
          if (*i == *j && !v.is_zero()) throw DefinitionError(b.loc, "bivector is antisymmetric: diagonal must be zero");
          pi[*i][*j] = v;
          pi[*j][*i] = -v;
        }
        m.algebroids[d.name] = rename(make_poisson(r, pi), d.name);
        return;
      }
      case K::explicit_:
        break;
    }
    const std::size_t n = d.basis.size();
    std::set<std::string> basis = names_of(d.basis);
    if (basis.size() != n) throw DefinitionError(here, "basis names must be distinct");
    auto index = [&](const std::string& s, SourceLoc loc) {
      auto it = std::find(d.basis.begin(), d.basis.end(), s);
      if (it == d.basis.end()) throw DefinitionError(loc, "'" + s + "' is not a basis element");
      return static_cast<std::size_t>(it - d.basis.begin());
    };
    std::set<std::string> derivs;
    for (std::size_t k = 0; k < r->num_derivations(); ++k) derivs.insert(r->derivation(k).name);
    std::vector<std::vector<RingElement>> anchor(n, std::vector<RingElement>(r->num_derivations(), RingElement(r)));
    std::set<std::size_t> anchored;
    for (const auto& [b, e] : d.anchor) {
      auto i = index(b, e.loc);
      if (!anchored.insert(i).second) throw DefinitionError(e.loc, "anchor of '" + b + "' given twice");
      auto v = eval_linear(e, r, Expr::Kind::derivation, derivs);
      if (!v.scalar.is_zero()) throw DefinitionError(e.loc, "anchor must be a combination of derivations d/dx");
      for (const auto& [name, c] : v.atoms) anchor[i][*r->derivation_index(name)] = c;
    }
    StructureTable table(r, n);
    std::set<std::pair<std::size_t, std::size_t>> given;
    for (const auto& b : d.brackets) {
      auto i = index(b.a, b.loc), j = index(b.b, b.loc);
      auto v = eval_linear(b.value, r, Expr::Kind::name, basis);
      if (!v.scalar.is_zero()) throw DefinitionError(b.value.loc, "bracket must be a combination of basis elements");
      if (i == j) {
        if (v.has_atoms()) throw DefinitionError(b.loc, "bracket of equal basis elements must be zero");
        continue;
      }
      if (!given.insert({std::min(i, j), std::max(i, j)}).second)
        throw DefinitionError(b.loc, "bracket [" + b.a + ", " + b.b + "] given twice");
      std::vector<RingElement> br(n, RingElement(r));
      for (const auto& [name, c] : v.atoms) br[index(name, b.loc)] = c;
      if (i > j)
        for (auto& c : br) c = -c;
      table.set(std::min(i, j), std::max(i, j), std::move(br));
    }
    m.algebroids[d.name] = Algebroid::make(r, n, std::move(anchor), std::move(table), d.basis, d.name);
  }

  static AlgebroidPtr rename(const AlgebroidPtr& l, const std::string& name) {
    return Algebroid::make(l->base(), l->rank(), l->anchor_coefficients(), l->structure(), l->basis_names(), name);
  }

  void operator()(const FormDecl& d) {
    const auto& l = lookup(m.algebroids, d.on, "algebroid");
    m.forms.emplace(d.name, eval_form(d.value, l));
  }

  void operator()(const ConnectionDecl& d) {
    const auto& l = lookup(m.algebroids, d.on, "algebroid");
    m.connections.emplace(d.name, connection_from(l, d.rank, d.components));
  }

  void operator()(const CoverDecl& d) {
    P1Algebroid kind;
    if (d.algebroid == "tangent") kind = P1Algebroid::tangent;
    else if (d.algebroid == "log") kind = P1Algebroid::log;
    else throw DefinitionError(here, "cover algebroid must be 'tangent' or 'log'");
    auto c = make_p1_cover(kind, d.k);
    c.name = d.name;
    m.covers.emplace(d.name, std::move(c));
  }

  std::size_t chart_index(const Cover& c, const std::string& name, SourceLoc loc) {
    for (std::size_t a = 0; a < c.charts().size(); ++a)
      if (c.charts()[a].name == name) return a;
    throw DefinitionError(loc, "cover " + c.name + " has no chart '" + name + "'");
  }

  void operator()(const CocycleDecl& d) {
    const auto& c = lookup(m.covers, d.cover, "cover");
    CechPair p;
    if (d.kind == CocycleDecl::Kind::atiyah) {
      if (!c.has_bundle()) throw DefinitionError(here, "cover " + c.name + " carries no line bundle (set k)");
      p = atiyah_cocycle(c);
    } else {
      p = CechPair::zero(c);
      std::set<std::size_t> seen_phi, seen_q;
      for (const auto& e : d.phi) {
        auto a = chart_index(c, e.first, e.loc), b = chart_index(c, e.second, e.loc);
        auto o = c.overlap_index(a, b);
        if (!o) throw DefinitionError(e.loc, "no overlap " + e.first + "|" + e.second + " (write the lower chart first)");
        if (!seen_phi.insert(*o).second) throw DefinitionError(e.loc, "phi on " + e.first + "|" + e.second + " given twice");
        p.phi[*o] = eval_form_degree(e.value, c.overlaps()[*o].algebroid, 1);
      }
      for (const auto& e : d.q) {
        auto a = chart_index(c, e.first, e.loc);
        if (!seen_q.insert(a).second) throw DefinitionError(e.loc, "Q on " + e.first + " given twice");
        p.q[a] = eval_form_degree(e.value, c.charts()[a].algebroid, 2);
      }
    }
    m.cocycles.emplace(d.name, std::make_pair(d.cover, std::move(p)));
  }

  void operator()(const BunchDecl& d) {
    const auto& c = lookup(m.covers, d.cover, "cover");
    if (d.rank < 1) throw DefinitionError(here, "bunch rank must be positive");
    const auto r = static_cast<std::size_t>(d.rank);
    std::vector<std::optional<Connection>> conns(c.charts().size());
    for (const auto& [chart, entries] : d.charts) {
      auto a = chart_index(c, chart, here);
      if (conns[a]) throw DefinitionError(here, "chart " + chart + " given twice");
      conns[a] = connection_from(c.charts()[a].algebroid, d.rank, entries);
    }
    LocalConnectionBunch b;
    b.rank = r;
    for (std::size_t a = 0; a < conns.size(); ++a)
      b.connections.push_back(conns[a] ? *conns[a] : Connection::trivial(c.charts()[a].algebroid, r));
    for (const auto& o : c.overlaps()) {
      auto g = o.bundle ? *o.bundle : RingElement(o.ring, Rational(1));
      b.transitions.push_back(scale(g, identity_matrix(o.ring, r)));
    }
    m.bunches.emplace(d.name, std::make_pair(d.cover, std::move(b)));
  }

  void operator()(const RelationsDecl& d) {
    const auto& l = lookup(m.algebroids, d.algebroid, "algebroid");
    LForm q(l, 2);
    if (d.twist) {
      q = lookup(m.forms, *d.twist, "form");
      if (q.owner() != l || q.degree() != 2) throw DefinitionError(here, "twist must be a 2-form on " + d.algebroid);
    }
    m.relations[d.name] = build_relations(l, q);
  }

  void operator()(const MatchedDecl& d) {
    if (d.kind == MatchedDecl::Kind::split) {
      const auto& l = lookup(m.algebroids, d.args[0], "algebroid");
      if (d.n1 < 0 || static_cast<std::size_t>(d.n1) > l->rank())
        throw DefinitionError(here, "split index out of range");
      m.matched.emplace(d.name, matched_from_decomposition(l, static_cast<std::size_t>(d.n1), d.name));
      return;
    }
    const auto& l1 = lookup(m.algebroids, d.args[0], "algebroid");
    const auto& l2 = lookup(m.algebroids, d.args[1], "algebroid");
    const auto& c12 = lookup(m.connections, d.args[2], "connection");
    const auto& c21 = lookup(m.connections, d.args[3], "connection");
    if (c12.algebroid() != l1 || c12.rank() != l2->rank())
      throw DefinitionError(here, d.args[2] + " must be a connection on " + d.args[0] + " of rank " +
                                      std::to_string(l2->rank()));
    if (c21.algebroid() != l2 || c21.rank() != l1->rank())
      throw DefinitionError(here, d.args[3] + " must be a connection on " + d.args[1] + " of rank " +
                                      std::to_string(l1->rank()));
    if (l1->base() != l2->base()) throw DefinitionError(here, "matched pair over different rings");
    m.matched.emplace(d.name, MatchedPairData{l1, l2, c12, c21, d.name});
  }
};

}  // namespace

BuildResult build_model(const DefinitionFile& f) {
  BuildResult res;
  Builder b{res.model, res.diagnostics, {}, {}};
  std::set<std::string> names;
  for (const auto& d : f.decls) {
    b.here = d.loc;
    const auto& name = d.name();
    if (!names.insert(name).second) {
      res.diagnostics.push_back({Diagnostic::Severity::error, d.loc, "name '" + name + "' already declared", std::nullopt});
      continue;
    }
    try {
      std::visit(b, d.body);
      res.model.order.emplace_back(d.keyword(), name);
    } catch (const Builder::Skip&) {
      b.failed.insert(name);
    } catch (const DefinitionError& e) {
      b.failed.insert(name);
      res.diagnostics.push_back({Diagnostic::Severity::error, e.loc, e.what(), std::nullopt});
    } catch (const StructuralError& e) {
      b.failed.insert(name);
      res.diagnostics.push_back({Diagnostic::Severity::error, d.loc, e.what(), std::nullopt});
    }
  }
  return res;
}

}  // namespace algebroid

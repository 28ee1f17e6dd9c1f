#include <algebroid/cli.hpp>

#include <algebroid/definition.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <sstream>

namespace algebroid::cli {

using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- json helpers

std::string tuple_key(const std::vector<int>& t, int shift) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i] + shift);
  return s;
}

Json json_ring(const RingElement& f) {
  Json j = Json::object();
  for (const auto& [e, q] : f.terms()) j[tuple_key(e, 0)] = to_fraction_string(q);
  return j;
}

Json json_form(const LForm& a) {
  Json c = Json::object();
  for (const auto& [t, f] : a.coefficients()) c[tuple_key(t, 1)] = json_ring(f);
  return Json{{"degree", a.degree()}, {"text", a.to_string()}, {"coefficients", c}};
}

Json json_matrix(const Matrix& m) {
  Json rows = Json::array();
  for (const auto& r : m) {
    Json row = Json::array();
    for (const auto& e : r) row.push_back(json_ring(e));
    rows.push_back(row);
  }
  return rows;
}

struct Usage {
  std::string message;
};

struct Options {
  bool json = false;
  std::string degrees = "0..2";
  std::optional<std::string> window;
  int k = 1;
  bool k_given = false;
  std::string algebroid = "tangent";
};

/// What a command produces: exit code, text lines, JSON body.
struct Outcome {
  int exit = verified;
  std::vector<std::string> lines;
  Json body = Json::object();
};

std::string status_word(int code) {
  switch (code) {
    case verified:
      return "verified";
    case refuted:
      return "refuted";
    case inconclusive:
      return "inconclusive";
    default:
      return "error";
  }
}

TruncationWindow parse_window(const Options& o) {
  if (!o.window) return default_window();
  TruncationWindow w = default_window();
  const auto& s = *o.window;
  try {
    auto comma = s.find(',');
    w.degree = std::stoi(s.substr(0, comma));
    if (comma != std::string::npos) w.extent = std::stoi(s.substr(comma + 1));
  } catch (const std::exception&) {
    throw Usage{"--window must be D or D,W"};
  }
  try {
    validate_window(w);
  } catch (const std::exception& e) {
    throw Usage{e.what()};
  }
  return w;
}

std::vector<int> parse_degrees(const std::string& s) {
  std::vector<int> out;
  try {
    auto dots = s.find("..");
    if (dots == std::string::npos) {
      out.push_back(std::stoi(s));
    } else {
      int a = std::stoi(s.substr(0, dots)), b = std::stoi(s.substr(dots + 2));
      if (a < 0 || b < a) throw Usage{"--degrees must be a..b with 0 <= a <= b"};
      for (int d = a; d <= b; ++d) out.push_back(d);
    }
  } catch (const std::logic_error&) {
    throw Usage{"--degrees must be a..b"};
  }
  return out;
}

std::string field_string(const Algebroid& l, std::size_t i) {
  std::string s;
  const auto& x = l.anchor_field(i);
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (x[v].is_zero()) continue;
    std::string c = x[v].to_string();
    std::string term = (c == "1" ? "" : x[v].is_monomial() ? c + "*" : "(" + c + ")*") + "d/d" + l.base()->var_name(v);
    if (s.empty()) s = term;
    else if (term[0] == '-') s += " - " + term.substr(1);
    else s += " + " + term;
  }
  return s.empty() ? "0" : s;
}

// ---------------------------------------------------------------- session

struct Session {
  Model& m;
  Options opt;
  std::vector<std::string> names;

  std::string name_at(std::size_t i, const std::string& keyword) const {
    if (i < names.size()) return names[i];
    if (auto n = m.last(keyword)) return *n;
    throw Usage{"no " + keyword + " declared"};
  }

  template <class Map>
  const typename Map::mapped_type& get(const Map& map, const std::string& name, const std::string& keyword) const {
    auto it = map.find(name);
    if (it == map.end()) throw Usage{"no " + keyword + " named '" + name + "'"};
    return it->second;
  }

  const AlgebroidPtr& algebroid(std::size_t i) const {
    return get(m.algebroids, name_at(i, "algebroid"), "algebroid");
  }
  const LForm& form(std::size_t i) const { return get(m.forms, name_at(i, "form"), "form"); }
  const Connection& connection(std::size_t i) const {
    return get(m.connections, name_at(i, "connection"), "connection");
  }
  const MatchedPairData& matched(std::size_t i) const { return get(m.matched, name_at(i, "matched"), "matched pair"); }
  const RelationsPtr& relations(std::size_t i) const {
    return get(m.relations, name_at(i, "relations"), "relation system");
  }
  const std::pair<std::string, CechPair>& cocycle(std::size_t i) const {
    return get(m.cocycles, name_at(i, "cocycle"), "cocycle");
  }
  const Cover& cover_named(const std::string& n) const { return get(m.covers, n, "cover"); }
};

Outcome report_axioms(const AlgebroidPtr& l, const std::string& name) {
  Outcome o;
  o.body["object"] = name;
  if (l->verified()) {
    o.lines.push_back(name + ": verified");
  } else {
    o.exit = refuted;
    auto w = describe(*l->witness(), *l);
    o.lines.push_back(name + ": refuted");
    o.lines.push_back("  witness: " + w);
    o.body["witness"] = w;
  }
  return o;
}

Outcome report_confluence(const RelationsPtr& r, const std::string& name) {
  Outcome o;
  o.body["object"] = name;
  if (auto a = confluence_check(r)) {
    o.exit = refuted;
    o.lines.push_back(name + ": not confluent");
    o.lines.push_back("  witness: " + a->to_string());
    o.body["witness"] = a->to_string();
    o.body["difference"] = a->difference.to_string();
  } else {
    o.lines.push_back(name + ": confluent");
  }
  return o;
}

Outcome report_cocycle(const Cover& c, const CechPair& p, const std::string& name) {
  Outcome o;
  auto rep = verify_cocycle(c, p);
  o.body["object"] = name;
  o.body["cover"] = c.name;
  o.lines.push_back(name + ": " + rep.to_string());
  if (rep.status == CocycleReport::Status::failed) {
    o.exit = refuted;
    o.body["equation"] = rep.equation;
    o.body["location"] = rep.location;
    o.body["residual"] = rep.residual;
  } else {
    o.body["degenerate"] = rep.status == CocycleReport::Status::degenerate_verified;
  }
  return o;
}

Outcome report_matched(const MatchedPairData& mp, const std::string& name) {
  Outcome o;
  o.body["object"] = name;
  if (auto w = verify_matched(mp)) {
    o.exit = refuted;
    o.lines.push_back(name + ": not matched");
    o.lines.push_back("  witness: " + w->to_string(mp));
    o.body["equation"] = w->equation;
    o.body["witness"] = w->to_string(mp);
  } else {
    o.lines.push_back(name + ": matched");
  }
  return o;
}

Outcome report_lambda(const Cover& c, const CechPair& p, const LocalConnectionBunch& b, const std::string& name) {
  Outcome o;
  o.body["object"] = name;
  if (auto w = verify_lambda_module(c, p, b)) {
    o.exit = refuted;
    o.lines.push_back(name + ": not a lambda-module");
    o.lines.push_back("  witness: " + w->to_string());
    o.body["witness"] = w->to_string();
  } else {
    o.lines.push_back(name + ": lambda-module verified");
  }
  return o;
}

Outcome cmd_verify(const Session& s) {
  std::string name = s.names.empty() ? (s.m.order.empty() ? throw Usage{"empty definition file"} : s.m.order.back().second)
                                     : s.names[0];
  std::string kw;
  for (const auto& [k, n] : s.m.order)
    if (n == name) kw = k;
  if (kw.empty()) throw Usage{"no declaration named '" + name + "'"};
  if (kw == "algebroid") return report_axioms(s.m.algebroids.at(name), name);
  if (kw == "relations") return report_confluence(s.m.relations.at(name), name);
  if (kw == "matched") return report_matched(s.m.matched.at(name), name);
  if (kw == "cocycle") {
    const auto& [cov, p] = s.m.cocycles.at(name);
    return report_cocycle(s.cover_named(cov), p, name);
  }
  if (kw == "bunch") {
    const auto& [cov, b] = s.m.bunches.at(name);
    const auto& c = s.cover_named(cov);
    return report_lambda(c, CechPair::zero(c), b, name);
  }
  if (kw == "connection") {
    Outcome o;
    const auto& c = s.m.connections.at(name);
    auto w = flatness_witness(c);
    o.lines.push_back(name + (w ? ": not flat" : ": flat"));
    if (w) {
      o.exit = refuted;
      o.lines.push_back("  witness: " + w->to_string(*c.algebroid()));
      o.body["witness"] = w->to_string(*c.algebroid());
    }
    return o;
  }
  if (kw == "form") {
    Outcome o;
    auto d = d_L(s.m.forms.at(name));
    o.lines.push_back(name + (d.is_zero() ? ": closed" : ": not closed"));
    if (!d.is_zero()) {
      o.exit = refuted;
      o.lines.push_back("  witness: d = " + d.to_string());
      o.body["witness"] = json_form(d);
    }
    return o;
  }
  Outcome o;
  o.lines.push_back(name + ": verified");
  return o;
}

void dims_lines(Outcome& o, const CohomologyReport& r, const std::string& key) {
  Json arr = Json::array();
  for (const auto& d : r.dims) {
    o.lines.push_back("  H^" + std::to_string(d.degree) + " = " + std::to_string(d.cohomology) + "  (cochains " +
                      std::to_string(d.cochains) + ", cocycles " + std::to_string(d.cocycles) + ", coboundaries " +
                      std::to_string(d.coboundaries) + ")");
    arr.push_back(Json{{"degree", d.degree},
                       {"cohomology", d.cohomology},
                       {"cochains", d.cochains},
                       {"cocycles", d.cocycles},
                       {"coboundaries", d.coboundaries}});
  }
  o.body[key] = arr;
}

Outcome cmd_cohomology(const Session& s) {
  const auto& l = s.algebroid(0);
  auto w = parse_window(s.opt);
  auto rep = truncated_cohomology(l, parse_degrees(s.opt.degrees), w);
  Outcome o;
  o.body["object"] = s.name_at(0, "algebroid");
  o.body["window"] = w.to_string();
  o.lines.push_back("cohomology of " + s.name_at(0, "algebroid") + " in window " + w.to_string());
  dims_lines(o, rep, "dims");
  o.lines.push_back(rep.stable ? "stable under enlargement by 2" : "not stable under enlargement by 2");
  o.body["stable"] = rep.stable;
  if (!rep.stable) o.exit = inconclusive;
  return o;
}

Outcome cmd_d(const Session& s) {
  const auto& f = s.form(0);
  auto d = d_L(f);
  Outcome o;
  o.lines.push_back("d(" + s.name_at(0, "form") + ") = " + d.to_string());
  o.body["object"] = s.name_at(0, "form");
  o.body["result"] = json_form(d);
  return o;
}

Outcome cmd_exact(const Session& s) {
  const auto& f = s.form(0);
  const auto name = s.name_at(0, "form");
  Outcome o;
  o.body["object"] = name;
  auto d = d_L(f);
  if (!d.is_zero()) {
    o.exit = refuted;
    o.lines.push_back(name + ": not closed");
    o.lines.push_back("  witness: d " + name + " = " + d.to_string());
    o.body["witness"] = json_form(d);
    return o;
  }
  auto w = parse_window(s.opt);
  auto r = exactness_solve(f, w);
  o.body["window"] = w.to_string();
  switch (r.status) {
    case ExactnessResult::Status::primitive:
      o.lines.push_back(name + ": exact, primitive " + r.primitive->to_string());
      o.body["primitive"] = json_form(*r.primitive);
      break;
    case ExactnessResult::Status::obstructed: {
      o.exit = refuted;
      auto res = r.residue->to_string(*f.owner());
      o.lines.push_back(name + ": not exact");
      o.lines.push_back("  witness: " + res);
      o.body["residue"] = res;
      break;
    }
    case ExactnessResult::Status::no_primitive_in_window:
      o.exit = inconclusive;
      o.lines.push_back(name + ": no primitive in window " + w.to_string());
      break;
  }
  return o;
}

Outcome cmd_curvature(const Session& s) {
  const auto& c = s.connection(0);
  auto f = curvature(c);
  const auto& l = *c.algebroid();
  Outcome o;
  o.body["object"] = s.name_at(0, "connection");
  Json entries = Json::object();
  for (std::size_t i = 0; i < l.rank(); ++i)
    for (std::size_t j = i + 1; j < l.rank(); ++j) {
      o.lines.push_back("F(" + l.basis_names()[i] + ", " + l.basis_names()[j] + ") = " + to_string(f(i, j)));
      entries[tuple_key({static_cast<int>(i), static_cast<int>(j)}, 1)] = json_matrix(f(i, j));
    }
  if (o.lines.empty()) o.lines.push_back("no pairs of basis elements");
  o.body["curvature"] = entries;
  return o;
}

Outcome cmd_flat(const Session& s) {
  const auto& c = s.connection(0);
  const auto name = s.name_at(0, "connection");
  Outcome o;
  o.body["object"] = name;
  if (auto w = flatness_witness(c)) {
    o.exit = refuted;
    o.lines.push_back(name + ": not flat");
    o.lines.push_back("  witness: " + w->to_string(*c.algebroid()));
    o.body["witness"] = w->to_string(*c.algebroid());
  } else {
    o.lines.push_back(name + ": flat");
  }
  return o;
}

Outcome cmd_chern(const Session& s) {
  const auto& c = s.connection(0);
  if (s.opt.k != 1 && s.opt.k != 2) throw Usage{"--k must be 1 or 2"};
  auto t = chern_trace_form(c, s.opt.k);
  Outcome o;
  o.body["object"] = s.name_at(0, "connection");
  o.body["k"] = s.opt.k;
  o.body["trace"] = json_form(t);
  o.lines.push_back("tr(F^" + std::to_string(s.opt.k) + ") = " + t.to_string());
  return o;
}

Outcome cmd_obstruction(const Session& s) {
  const auto& c = s.connection(0);
  const auto& q = s.form(1);
  if (q.owner() != c.algebroid() || q.degree() != 2) throw Usage{"Q must be a 2-form on the connection's algebroid"};
  auto w = parse_window(s.opt);
  auto r = obstruction_trace_check(c, q, w);
  Outcome o;
  o.body["connection"] = s.name_at(0, "connection");
  o.body["twist"] = s.name_at(1, "form");
  o.body["window"] = w.to_string();
  switch (r.status) {
    case ObstructionResult::Status::consistent:
      o.lines.push_back("consistent: r*Q is exact");
      if (r.exactness.primitive) {
        o.lines.push_back("  primitive " + r.exactness.primitive->to_string());
        o.body["primitive"] = json_form(*r.exactness.primitive);
      }
      break;
    case ObstructionResult::Status::obstructed: {
      o.exit = refuted;
      auto res = r.exactness.residue->to_string(*q.owner());
      o.lines.push_back("obstructed: r*Q is not exact");
      o.lines.push_back("  witness: " + res);
      o.body["residue"] = res;
      break;
    }
    case ObstructionResult::Status::obstructed_in_window:
      o.exit = inconclusive;
      o.lines.push_back("no primitive of r*Q in window " + w.to_string());
      break;
  }
  return o;
}

Outcome cmd_matched(const Session& s) { return report_matched(s.matched(0), s.name_at(0, "matched")); }

Outcome cmd_twilled(const Session& s) {
  const auto& mp = s.matched(0);
  auto o = report_matched(mp, s.name_at(0, "matched"));
  if (o.exit != verified) return o;
  auto t = twilled_sum(mp);
  o.lines.clear();
  o.lines.push_back("twilled sum of rank " + std::to_string(t->rank()));
  Json anchors = Json::object(), brackets = Json::object();
  const auto& names = t->basis_names();
  for (std::size_t i = 0; i < t->rank(); ++i) {
    o.lines.push_back("  a(" + names[i] + ") = " + field_string(*t, i));
    anchors[names[i]] = field_string(*t, i);
  }
  for (std::size_t i = 0; i < t->rank(); ++i)
    for (std::size_t j = i + 1; j < t->rank(); ++j) {
      auto b = basis_bracket(t, i, j);
      if (b.is_zero()) continue;
      const auto key = "[" + names[i] + ", " + names[j] + "]";
      o.lines.push_back("  " + key + " = " + b.to_string());
      brackets[key] = b.to_string();
    }
  o.body["rank"] = t->rank();
  o.body["anchor"] = anchors;
  o.body["bracket"] = brackets;
  o.body["verified"] = t->verified();
  return o;
}

Outcome cmd_compare_total(const Session& s) {
  const auto& mp = s.matched(0);
  auto w = parse_window(s.opt);
  Outcome o;
  o.body["object"] = s.name_at(0, "matched");
  if (auto wit = verify_matched(mp)) {
    o.exit = refuted;
    o.lines.push_back("not matched: " + wit->to_string(mp));
    o.body["witness"] = wit->to_string(mp);
    return o;
  }
  auto cmp = total_cohomology_compare(mp, parse_degrees(s.opt.degrees), w);
  o.body["window"] = w.to_string();
  o.lines.push_back("total complex in window " + w.to_string());
  dims_lines(o, cmp.total, "total");
  o.lines.push_back("twilled sum");
  dims_lines(o, cmp.twilled, "twilled");
  const bool stable = cmp.total.stable && cmp.twilled.stable;
  o.lines.push_back(std::string(cmp.agree ? "dimensions agree" : "dimensions differ") +
                    (stable ? ", stable" : ", not stable"));
  o.body["agree"] = cmp.agree;
  o.body["stable"] = stable;
  if (!cmp.agree) o.exit = refuted;
  else if (!stable) o.exit = inconclusive;
  return o;
}

Outcome cmd_relations(const Session& s) {
  const auto& l = s.algebroid(0);
  LForm q(l, 2);
  if (s.names.size() > 1) {
    q = s.get(s.m.forms, s.names[1], "form");
    if (q.owner() != l || q.degree() != 2) throw Usage{"Q must be a 2-form on " + s.names[0]};
  }
  Outcome o;
  o.body["algebroid"] = s.name_at(0, "algebroid");
  auto dq = d_L(q);
  if (!dq.is_zero()) {
    o.exit = refuted;
    o.lines.push_back("twist is not closed");
    o.lines.push_back("  witness: d " + s.names[1] + " = " + dq.to_string());
    o.body["witness"] = json_form(dq);
    return o;
  }
  auto r = build_relations(l, q);
  const auto& names = l->basis_names();
  Json rel = Json::array();
  auto push = [&](const std::string& lhs, const PbwElement& rhs) {
    o.lines.push_back("  " + lhs + " -> " + rhs.to_string());
    rel.push_back(Json{{"word", lhs}, {"normal_form", rhs.to_string()}});
  };
  const auto& ring = l->base();
  for (std::size_t i = 0; i < l->rank(); ++i)
    for (std::size_t v = 0; v < ring->num_vars(); ++v)
      push(names[i] + "*" + ring->var_name(v), normal_form({Letter::gen(i), Letter::ring(RingElement::variable(ring, v))}, r));
  for (std::size_t j = 0; j < l->rank(); ++j)
    for (std::size_t i = 0; i < j; ++i) push(names[j] + "*" + names[i], normal_form({Letter::gen(j), Letter::gen(i)}, r));
  o.lines.insert(o.lines.begin(), "relations of U(" + s.name_at(0, "algebroid") + ")");
  o.body["relations"] = rel;
  return o;
}

Outcome cmd_normal_form(const Session& s) {
  if (s.names.empty()) throw Usage{"normal-form needs a word"};
  const bool named = s.names.size() > 1;
  const auto& r = named ? s.get(s.m.relations, s.names[0], "relation system") : s.relations(99);
  const auto& text = s.names[named ? 1 : 0];
  std::vector<Diagnostic> diags;
  auto e = parse_expression(text, diags);
  if (!e) throw Usage{"bad word: " + diags.front().message};
  RawWord w;
  try {
    w = eval_word(*e, r);
  } catch (const DefinitionError& err) {
    throw Usage{std::string("bad word: ") + err.what()};
  }
  auto nf = normal_form(w, r);
  Outcome o;
  o.lines.push_back(text + " = " + nf.to_string());
  o.body["word"] = text;
  o.body["normal_form"] = nf.to_string();
  return o;
}

Outcome cmd_confluence(const Session& s) { return report_confluence(s.relations(0), s.name_at(0, "relations")); }

Outcome cmd_atiyah(const Session& s) {
  Cover c;
  if (!s.names.empty()) {
    c = s.cover_named(s.names[0]);
    if (s.opt.k_given) throw Usage{"--k applies only when no cover is named"};
  } else {
    P1Algebroid kind;
    if (s.opt.algebroid == "tangent") kind = P1Algebroid::tangent;
    else if (s.opt.algebroid == "log") kind = P1Algebroid::log;
    else throw Usage{"--algebroid must be tangent or log"};
    c = make_p1_cover(kind, s.opt.k);
  }
  if (!c.has_bundle()) throw Usage{"cover carries no line bundle"};
  auto p = atiyah_cocycle(c);
  auto rep = verify_cocycle(c, p);
  Outcome o;
  o.body["cover"] = c.name;
  if (c.twist) o.body["k"] = *c.twist;
  Json phis = Json::object();
  for (std::size_t i = 0; i < c.overlaps().size(); ++i) {
    const auto& ov = c.overlaps()[i];
    const auto where = c.charts()[ov.a].name + "|" + c.charts()[ov.b].name;
    o.lines.push_back("phi " + where + " = " + p.phi[i].to_string());
    phis[where] = json_form(p.phi[i]);
  }
  o.lines.push_back("cocycle: " + rep.to_string());
  o.body["phi"] = phis;
  o.body["cocycle"] = rep.to_string();
  if (rep.status == CocycleReport::Status::failed) o.exit = refuted;
  return o;
}

Outcome cmd_class_compare(const Session& s) {
  if (s.names.size() < 2) throw Usage{"class-compare needs two cocycles"};
  const auto& [c1, p1] = s.get(s.m.cocycles, s.names[0], "cocycle");
  const auto& [c2, p2] = s.get(s.m.cocycles, s.names[1], "cocycle");
  if (c1 != c2) throw Usage{"cocycles live on different covers"};
  const auto& c = s.cover_named(c1);
  for (const auto* p : {&p1, &p2})
    if (verify_cocycle(c, *p).status == CocycleReport::Status::failed) {
      Outcome o;
      o.exit = refuted;
      o.lines.push_back("input is not a cocycle: " + verify_cocycle(c, *p).to_string());
      return o;
    }
  auto w = parse_window(s.opt);
  auto rep = coboundary_test(c, p1, p2, w);
  Outcome o;
  o.body["first"] = s.names[0];
  o.body["second"] = s.names[1];
  o.body["window"] = w.to_string();
  switch (rep.status) {
    case CoboundaryReport::Status::equivalent: {
      o.lines.push_back("equivalent: difference is a coboundary");
      Json eta = Json::object();
      for (std::size_t a = 0; a < c.charts().size(); ++a) {
        o.lines.push_back("  eta " + c.charts()[a].name + " = " + rep.eta[a].to_string());
        eta[c.charts()[a].name] = json_form(rep.eta[a]);
      }
      o.body["eta"] = eta;
      break;
    }
    case CoboundaryReport::Status::inequivalent:
      o.exit = refuted;
      o.lines.push_back("inequivalent");
      o.lines.push_back("  witness: " + rep.residue->to_string() + " (coefficient of z^-1 dz on U0|U1)");
      o.body["residue"] = rep.residue->to_string();
      break;
    case CoboundaryReport::Status::inequivalent_in_window:
      o.exit = inconclusive;
      o.lines.push_back("no coboundary in window " + w.to_string());
      break;
  }
  return o;
}

Outcome cmd_glue(const Session& s) {
  const auto cov = s.name_at(0, "cover");
  const auto& c = s.cover_named(cov);
  const auto pname = s.name_at(1, "cocycle");
  const auto& [pc, p] = s.get(s.m.cocycles, pname, "cocycle");
  if (pc != cov) throw Usage{"cocycle " + pname + " lives on " + pc};
  auto rep = glue_sridharan(c, p);
  Outcome o;
  o.body["cover"] = cov;
  o.body["cocycle"] = pname;
  if (rep.failure) {
    o.exit = refuted;
    o.lines.push_back("gluing fails");
    o.lines.push_back("  witness: " + *rep.failure);
    o.body["witness"] = *rep.failure;
    return o;
  }
  Json maps = Json::object();
  for (const auto& g : rep.maps) {
    const auto& ov = c.overlaps()[g.overlap];
    const auto where = c.charts()[ov.a].name + "|" + c.charts()[ov.b].name;
    Json imgs = Json::object();
    const auto& names = ov.algebroid->basis_names();
    for (std::size_t i = 0; i < g.map.images.size(); ++i) {
      o.lines.push_back("g " + where + ": " + names[i] + " -> " + g.map.images[i].to_string());
      imgs[names[i]] = g.map.images[i].to_string();
    }
    maps[where] = imgs;
  }
  o.lines.push_back("relations preserved");
  o.body["maps"] = maps;
  return o;
}

Outcome cmd_lambda_check(const Session& s) {
  const auto cov = s.name_at(0, "cover");
  const auto& c = s.cover_named(cov);
  const auto pname = s.name_at(1, "cocycle");
  const auto& [pc, p] = s.get(s.m.cocycles, pname, "cocycle");
  const auto bname = s.name_at(2, "bunch");
  const auto& [bc, b] = s.get(s.m.bunches, bname, "bunch");
  if (pc != cov || bc != cov) throw Usage{"cocycle and bunch must live on " + cov};
  return report_lambda(c, p, b, bname);
}

using Handler = std::function<Outcome(const Session&)>;

const std::vector<std::pair<std::string, Handler>>& commands() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"verify", cmd_verify},           {"cohomology", cmd_cohomology},
      {"d", cmd_d},                     {"exact", cmd_exact},
      {"curvature", cmd_curvature},     {"flat", cmd_flat},
      {"chern", cmd_chern},             {"obstruction", cmd_obstruction},
      {"matched", cmd_matched},         {"twilled", cmd_twilled},
      {"compare-total", cmd_compare_total}, {"relations", cmd_relations},
      {"normal-form", cmd_normal_form}, {"confluence", cmd_confluence},
      {"atiyah", cmd_atiyah},           {"class-compare", cmd_class_compare},
      {"glue", cmd_glue},               {"lambda-check", cmd_lambda_check},
  };
  return table;
}

std::string summary(const std::string& c) {
  static const std::map<std::string, std::string> text = {
      {"verify", "check the declaration named (default: the last one)"},
      {"cohomology", "truncated cohomology dimensions"},
      {"d", "apply d_L to a form"},
      {"exact", "search for a primitive of a closed form"},
      {"curvature", "curvature of a connection"},
      {"flat", "flatness with a witness"},
      {"chern", "tr(F^k), k = 1 or 2"},
      {"obstruction", "trace obstruction for F = Q id"},
      {"matched", "check the matched-pair identities"},
      {"twilled", "anchor and brackets of the twilled sum"},
      {"compare-total", "total complex vs twilled sum cohomology"},
      {"relations", "commutation relations of the twisted enveloping algebra"},
      {"normal-form", "PBW normal form of a word"},
      {"confluence", "check all overlap ambiguities resolve"},
      {"atiyah", "Atiyah cocycle of a line bundle on P^1"},
      {"class-compare", "are two Cech pairs cohomologous"},
      {"glue", "glue local twisted enveloping algebras"},
      {"lambda-check", "check local connections form a module"},
  };
  return text.at(c);
}

void emit(std::ostream& out, const Options& opt, const std::string& command, const std::string& file,
          const Outcome& o) {
  if (opt.json) {
    Json j;
    j["command"] = command;
    j["file"] = file;
    j["status"] = status_word(o.exit);
    j["exit"] = o.exit;
    for (const auto& [k, v] : o.body.items()) j[k] = v;
    out << j.dump(2) << "\n";
    return;
  }
  for (const auto& l : o.lines) out << l << "\n";
}

int fail_usage(std::ostream& out, std::ostream& err, const Options& opt, const std::string& command,
               const std::string& file, const std::string& msg, const std::vector<Diagnostic>& diags = {}) {
  if (opt.json) {
    Json j;
    j["command"] = command;
    j["file"] = file;
    j["status"] = "error";
    j["exit"] = int(usage);
    j["message"] = msg;
    Json ds = Json::array();
    for (const auto& d : diags)
      ds.push_back(Json{{"line", d.loc.line}, {"col", d.loc.col}, {"severity", "error"}, {"message", d.message}});
    j["diagnostics"] = ds;
    out << j.dump(2) << "\n";
  } else {
    for (const auto& d : diags) err << file << ":" << d.to_string() << "\n";
    err << "error: " << msg << "\n";
  }
  return usage;
}

struct Parsed {
  std::string command, file;
  std::vector<std::string> names;
  Options opt;
};

/// nullopt after printing help or a usage error; `code` holds the exit code.
std::optional<Parsed> parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                                 int& code) {
  CLI::App app{"Lie algebroid toolkit: definition files in, verdicts out", "adf"};
  app.require_subcommand(1);
  Parsed p;
  for (const auto& [name, h] : commands()) {
    auto* sub = app.add_subcommand(name, summary(name));
    sub->add_option("file", p.file, "definition file (.adf)")->required();
    sub->add_option("names", p.names, "declaration names / word");
    sub->add_flag("--json", p.opt.json, "stable JSON output");
    if (name == "cohomology" || name == "compare-total")
      sub->add_option("--degrees", p.opt.degrees, "degree range a..b");
    if (name == "cohomology" || name == "compare-total" || name == "exact" || name == "obstruction" ||
        name == "class-compare")
      sub->add_option("--window", p.opt.window, "D or D,W");
    CLI::Option* kopt = nullptr;
    if (name == "chern" || name == "atiyah") kopt = sub->add_option("--k", p.opt.k, "k");
    if (name == "atiyah") sub->add_option("--algebroid", p.opt.algebroid, "tangent or log");
    sub->callback([&p, name = name, kopt] {
      p.command = name;
      p.opt.k_given = kopt && kopt->count() > 0;
    });
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    code = app.exit(e, out, err);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    code = usage;
    return std::nullopt;
  }
  return p;
}

int execute(const Parsed& p, const std::string& text, std::ostream& out, std::ostream& err) {
  auto parsed = parse_definitions(text);
  if (!parsed.file) return fail_usage(out, err, p.opt, p.command, p.file, "definition file has errors", parsed.diagnostics);
  auto built = build_model(*parsed.file);
  if (!built.diagnostics.empty())
    return fail_usage(out, err, p.opt, p.command, p.file, "definition file has errors", built.diagnostics);
  Session s{built.model, p.opt, p.names};
  Handler h;
  for (const auto& [name, f] : commands())
    if (name == p.command) h = f;
  try {
    auto o = h(s);
    emit(out, p.opt, p.command, p.file, o);
    return o.exit;
  } catch (const Usage& u) {
    return fail_usage(out, err, p.opt, p.command, p.file, u.message);
  } catch (const StructuralError& e) {
    return fail_usage(out, err, p.opt, p.command, p.file, e.what());
  } catch (const std::invalid_argument& e) {
    return fail_usage(out, err, p.opt, p.command, p.file, e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  int code = 0;
  auto p = parse_args(args, out, err, code);
  if (!p) return code;
  std::ifstream in(p->file, std::ios::binary);
  if (!in) return fail_usage(out, err, p->opt, p->command, p->file, "cannot read " + p->file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return execute(*p, ss.str(), out, err);
}

int run_text(const std::vector<std::string>& args, const std::string& file, const std::string& text,
             std::ostream& out, std::ostream& err) {
  int code = 0;
  std::vector<std::string> full = args;
  if (full.empty()) full.push_back("verify");
  full.insert(full.begin() + 1, file);
  auto p = parse_args(full, out, err, code);
  if (!p) return code;
  return execute(*p, text, out, err);
}

}  // namespace algebroid::cli

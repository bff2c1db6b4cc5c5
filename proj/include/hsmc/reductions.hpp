#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hsmc/formula.hpp"
#include "hsmc/kripke.hpp"

namespace hsmc {

// A Kripke structure and the formula it should be checked against.
struct Reduction {
  KripkeStructure model;
  Formula formula;
};

// ---------------------------------------------------------------------------
// Quantified Boolean formulas

enum class Quantifier { Exists, Forall };

struct Qbf {
  std::vector<std::pair<Quantifier, std::string>> prefix; // outermost first: Q_n x_n ... Q_1 x_1
  Formula matrix = Formula::top();
};

namespace detail {

inline bool eval_prop(const Formula& f, const std::map<std::string, bool>& val) {
  switch (f.op()) {
  case Op::Top: return true;
  case Op::Bottom: return false;
  case Op::Prop: {
    auto it = val.find(f.name());
    if (it == val.end()) throw Error("unassigned variable '" + f.name() + "'");
    return it->second;
  }
  case Op::Not: return !eval_prop(f.child(), val);
  case Op::And: return eval_prop(f.lhs(), val) && eval_prop(f.rhs(), val);
  case Op::Or: return eval_prop(f.lhs(), val) || eval_prop(f.rhs(), val);
  case Op::Implies: return !eval_prop(f.lhs(), val) || eval_prop(f.rhs(), val);
  case Op::Iff: return eval_prop(f.lhs(), val) == eval_prop(f.rhs(), val);
  default: throw FragmentError("matrix must be propositional");
  }
}

inline void collect_props(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::Prop) out.insert(f.name());
  if (f.op() == Op::Not || f.op() == Op::Diamond || f.op() == Op::Box || f.op() == Op::BigAnd) collect_props(f.child(), out);
  if (f.op() == Op::And || f.op() == Op::Or || f.op() == Op::Implies || f.op() == Op::Iff) {
    collect_props(f.lhs(), out);
    collect_props(f.rhs(), out);
  }
}

inline bool qbf_rec(const Qbf& q, std::size_t i, std::map<std::string, bool>& val) {
  if (i == q.prefix.size()) return eval_prop(q.matrix, val);
  const auto& [quant, var] = q.prefix[i];
  bool out = quant == Quantifier::Forall;
  for (bool b : {false, true}) {
    val[var] = b;
    bool r = qbf_rec(q, i + 1, val);
    if (quant == Quantifier::Exists && r) out = true;
    if (quant == Quantifier::Forall && !r) out = false;
  }
  val.erase(var);
  return out;
}

} // namespace detail

inline bool eval_qbf(const Qbf& q) {
  std::map<std::string, bool> val;
  return detail::qbf_rec(q, 0, val);
}

inline void validate_qbf(const Qbf& q) {
  std::set<std::string> vars;
  for (const auto& [_, v] : q.prefix) {
    if (!detail::is_identifier(v) || v == "T" || v == "F" || v == "AND" || v == "start" || v == "E" || v == "A")
      throw ParseError("invalid variable name '" + v + "'");
    if (!vars.insert(v).second) throw ParseError("variable '" + v + "' quantified twice");
  }
  if (!is_propositional(q.matrix)) throw FragmentError("matrix must be propositional");
  std::set<std::string> used;
  detail::collect_props(q.matrix, used);
  for (const auto& u : used)
    if (!vars.count(u)) throw ParseError("matrix variable '" + u + "' is not quantified");
}

// First non-comment line: quantifier prefix such as "E x3 A x2 E x1" (may be omitted when there are no
// variables). The remaining text is the matrix in formula syntax.
inline Qbf parse_qbf(std::string_view text) {
  Qbf q;
  std::istringstream in{std::string(text)};
  std::string line, rest;
  bool have_prefix = false;
  std::size_t lineno = 0, prefix_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line.substr(0, line.find('#'));
    if (!have_prefix) {
      auto w = detail::words(body);
      if (w.empty()) continue;
      have_prefix = true;
      bool is_prefix = w.size() % 2 == 0;
      for (std::size_t i = 0; is_prefix && i < w.size(); i += 2) is_prefix = w[i] == "E" || w[i] == "A";
      if (is_prefix) {
        prefix_line = lineno;
        for (std::size_t i = 0; i < w.size(); i += 2)
          q.prefix.emplace_back(w[i] == "E" ? Quantifier::Exists : Quantifier::Forall, w[i + 1]);
        continue;
      }
    }
    rest += body + "\n";
  }
  if (detail::trim(rest).empty()) throw ParseError("missing QBF matrix");
  q.matrix = parse_formula(rest);
  try {
    validate_qbf(q);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), prefix_line);
  }
  return q;
}

inline std::string format_qbf(const Qbf& q) {
  std::string out;
  for (std::size_t i = 0; i < q.prefix.size(); ++i) {
    if (i) out += ' ';
    out += (q.prefix[i].first == Quantifier::Exists ? "E " : "A ") + q.prefix[i].second;
  }
  return out + "\n" + to_string(q.matrix) + "\n";
}

inline std::string aux_name(const std::string& var) { return var + "_aux"; }

// Structure with 4n+3 states and a formula over A and Bi that holds iff the QBF is true.
inline Reduction qbf_to_kripke(const Qbf& q) {
  validate_qbf(q);
  const std::size_t n = q.prefix.size();
  std::vector<std::string> states{"w0", "w1"};
  std::vector<std::string> props;
  for (const auto& [_, v] : q.prefix) props.push_back(v);
  props.push_back("start");
  for (const auto& [_, v] : q.prefix) props.push_back(aux_name(v));

  // block i (0-based in prefix order) occupies states 2+4i .. 5+4i: T1, T2, F1, F2
  for (const auto& [_, v] : q.prefix)
    for (const char* s : {"_T1", "_T2", "_F1", "_F2"}) states.push_back("w_" + v + s);
  states.push_back("sink");
  const auto sink = static_cast<StateId>(states.size() - 1);
  auto t1 = [](std::size_t i) { return static_cast<StateId>(2 + 4 * i); };

  std::vector<StateSet> holds(props.size());
  StateSet every = StateSet::all(states.size());
  for (std::size_t i = 0; i < n; ++i) {
    holds[i] = every;
    holds[i].erase(t1(i) + 2);
    holds[i].erase(t1(i) + 3);
    holds[n + 1 + i] = StateSet::from_bits(0xFULL << t1(i));
  }
  holds[n].insert(0);
  holds[n].insert(1);

  std::vector<std::pair<StateId, StateId>> edges{{0, 1}};
  if (n == 0) {
    edges.emplace_back(1, sink);
  } else {
    edges.emplace_back(1, t1(0));
    edges.emplace_back(1, t1(0) + 2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    edges.emplace_back(t1(i), t1(i) + 1);
    edges.emplace_back(t1(i) + 2, t1(i) + 3);
    for (StateId from : {t1(i) + 1, t1(i) + 3}) {
      if (i + 1 < n) {
        edges.emplace_back(from, t1(i + 1));
        edges.emplace_back(from, t1(i + 1) + 2);
      } else {
        edges.emplace_back(from, sink);
      }
    }
  }
  edges.emplace_back(sink, sink);

  Formula xi = q.matrix;
  for (std::size_t i = n; i-- > 0;) {
    const auto& [quant, v] = q.prefix[i];
    Formula pick = Formula::diamond(Rel::A, Formula::prop(aux_name(v)));
    xi = quant == Quantifier::Exists ? Formula::diamond(Rel::Bbar, Formula::conj(pick, xi))
                                     : Formula::box(Rel::Bbar, Formula::implies(pick, xi));
  }
  return {KripkeStructure(states, props, holds, edges, 0), Formula::implies(Formula::prop("start"), xi)};
}

// ---------------------------------------------------------------------------
// CNF

struct Cnf {
  std::size_t vars = 0;
  std::vector<std::vector<int>> clauses; // DIMACS literals
};

inline std::string var_name(std::size_t i) { return "x" + std::to_string(i); }

// DIMACS: 'c' comment lines, a "p cnf <vars> <clauses>" header, clauses terminated by 0.
inline Cnf parse_dimacs(std::string_view text) {
  Cnf c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0, declared = 0;
  bool header = false;
  std::vector<int> cur;
  while (std::getline(in, line)) {
    ++lineno;
    auto w = detail::words(line);
    if (w.empty() || w[0] == "c" || w[0][0] == '%') continue;
    if (w[0] == "p") {
      if (header || w.size() != 4 || w[1] != "cnf") throw ParseError("expected 'p cnf <vars> <clauses>'", lineno);
      try {
        c.vars = std::stoul(w[2]);
        declared = std::stoul(w[3]);
      } catch (const std::exception&) {
        throw ParseError("malformed header", lineno);
      }
      header = true;
      continue;
    }
    if (!header) throw ParseError("clause before 'p cnf' header", lineno);
    for (const auto& tok : w) {
      int lit;
      try {
        std::size_t used = 0;
        lit = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("bad literal '" + tok + "'", lineno);
      }
      if (lit == 0) {
        c.clauses.push_back(cur);
        cur.clear();
        continue;
      }
      if (static_cast<std::size_t>(std::abs(lit)) > c.vars) throw ParseError("literal out of range: " + tok, lineno);
      cur.push_back(lit);
    }
  }
  if (!header) throw ParseError("missing 'p cnf' header");
  if (!cur.empty()) c.clauses.push_back(cur);
  if (c.clauses.size() != declared)
    throw ParseError("header declares " + std::to_string(declared) + " clauses, found " + std::to_string(c.clauses.size()));
  return c;
}

inline std::string format_dimacs(const Cnf& c) {
  std::string out = "p cnf " + std::to_string(c.vars) + " " + std::to_string(c.clauses.size()) + "\n";
  for (const auto& cl : c.clauses) {
    for (int l : cl) out += std::to_string(l) + " ";
    out += "0\n";
  }
  return out;
}

inline Formula cnf_formula(const Cnf& c) {
  std::optional<Formula> all;
  for (const auto& cl : c.clauses) {
    std::optional<Formula> clause;
    for (int l : cl) {
      Formula lit = Formula::prop(var_name(static_cast<std::size_t>(std::abs(l))));
      if (l < 0) lit = Formula::neg(lit);
      clause = clause ? Formula::disj(*clause, lit) : lit;
    }
    Formula cf = clause ? *clause : Formula::bottom();
    all = all ? Formula::conj(*all, cf) : cf;
  }
  return all ? *all : Formula::top();
}

inline bool satisfies(const Cnf& c, const std::vector<bool>& assignment) {
  for (const auto& cl : c.clauses) {
    bool sat = false;
    for (int l : cl) sat = sat || assignment[static_cast<std::size_t>(std::abs(l))] == (l > 0);
    if (!sat) return false;
  }
  return true;
}

// Satisfying assignment indexed 1..vars (entry 0 unused), if any.
inline std::optional<std::vector<bool>> brute_force_sat(const Cnf& c) {
  std::vector<bool> a(c.vars + 1, false);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << c.vars); ++m) {
    for (std::size_t i = 1; i <= c.vars; ++i) a[i] = (m >> (i - 1)) & 1U;
    if (satisfies(c, a)) return a;
  }
  return std::nullopt;
}

// Structure with 2n+1 states and a propositional formula that is violated iff the CNF is satisfiable.
inline Reduction sat_to_kripke(const Cnf& c) {
  if (c.vars == 0) throw Error("CNF needs at least one variable");
  const std::size_t n = c.vars;
  std::vector<std::string> states{"w0"};
  std::vector<std::string> props;
  for (std::size_t i = 1; i <= n; ++i) {
    states.push_back("w" + std::to_string(i) + "_T");
    states.push_back("w" + std::to_string(i) + "_F");
    props.push_back(var_name(i));
  }
  auto tt = [](std::size_t i) { return static_cast<StateId>(2 * i - 1); };
  std::vector<StateSet> holds(n, StateSet::all(states.size()));
  for (std::size_t i = 1; i <= n; ++i) holds[i - 1].erase(tt(i) + 1);
  std::vector<std::pair<StateId, StateId>> edges{{0, tt(1)}, {0, tt(1) + 1}};
  for (std::size_t i = 1; i < n; ++i)
    for (StateId a : {tt(i), tt(i) + 1})
      for (StateId b : {tt(i + 1), tt(i + 1) + 1}) edges.emplace_back(a, b);
  edges.emplace_back(tt(n), tt(n));
  edges.emplace_back(tt(n) + 1, tt(n) + 1);
  return {KripkeStructure(states, props, holds, edges, 0), Formula::neg(cnf_formula(c))};
}

// Assignment read off a track of the SAT structure: x_i is true iff it labels the whole track.
inline std::vector<bool> decode_assignment(const KripkeStructure& k, const Track& t, std::size_t vars) {
  std::vector<bool> a(vars + 1, false);
  auto label = track_label(k, t);
  for (PropId p : label) {
    const std::string& name = k.prop_name(p);
    if (name.size() > 1 && name[0] == 'x') {
      std::size_t i = std::stoul(name.substr(1));
      if (i <= vars) a[i] = true;
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Random instances. Generation uses the raw engine output so that a seed gives the same
// instance on every platform.

inline Cnf random_cnf(std::size_t vars, std::size_t clauses, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Cnf c;
  c.vars = vars;
  const std::size_t width = std::min<std::size_t>(3, vars);
  for (std::size_t j = 0; j < clauses; ++j) {
    std::vector<int> cl;
    while (cl.size() < width) {
      int v = static_cast<int>(rng() % vars) + 1;
      if (std::any_of(cl.begin(), cl.end(), [&](int l) { return std::abs(l) == v; })) continue;
      cl.push_back(rng() % 2 ? v : -v);
    }
    c.clauses.push_back(cl);
  }
  return c;
}

inline Qbf random_qbf(std::size_t vars, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Qbf q;
  for (std::size_t i = vars; i >= 1; --i)
    q.prefix.emplace_back(rng() % 2 ? Quantifier::Exists : Quantifier::Forall, var_name(i));
  if (vars == 0) {
    q.matrix = rng() % 2 ? Formula::top() : Formula::bottom();
    return q;
  }
  std::size_t clauses = 1 + rng() % (2 * vars + 1);
  Cnf c = random_cnf(vars, clauses, rng());
  for (auto& cl : c.clauses) cl.resize(1 + rng() % cl.size());
  q.matrix = cnf_formula(c);
  return q;
}

} // namespace hsmc

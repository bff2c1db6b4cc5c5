#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsmc/error.hpp"

namespace hsmc {

// Interval relations. The first six are primitive; the rest are derived and removed by desugar().
enum class Rel : std::uint8_t { A, Abar, B, Bbar, E, Ebar, L, Lbar, D, Dbar, O, Obar };

enum class Op : std::uint8_t { Top, Bottom, Prop, Not, And, Or, Implies, Iff, Diamond, Box, BigAnd };

enum class FragmentClass : std::uint8_t {
  Prop,
  ForallAAbarBE,
  ExistsAAbarBE,
  AAbar,
  AAbarBbarEbar,
  AAbarBBbarEbar,
  OutOfScope,
};

inline const char* rel_name(Rel r) {
  static const char* names[] = {"A", "Ai", "B", "Bi", "E", "Ei", "L", "Li", "D", "Di", "O", "Oi"};
  return names[static_cast<int>(r)];
}

inline const char* class_name(FragmentClass c) {
  switch (c) {
  case FragmentClass::Prop: return "Prop";
  case FragmentClass::ForallAAbarBE: return "ForallAAbarBE";
  case FragmentClass::ExistsAAbarBE: return "ExistsAAbarBE";
  case FragmentClass::AAbar: return "AAbar";
  case FragmentClass::AAbarBbarEbar: return "AAbarBbarEbar";
  case FragmentClass::AAbarBBbarEbar: return "AAbarBBbarEbar";
  case FragmentClass::OutOfScope: return "OutOfScope";
  }
  return "?";
}

inline bool is_primitive(Rel r) { return static_cast<int>(r) <= static_cast<int>(Rel::Ebar); }

// Modal exponent: a literal count or the index variable of an enclosing big conjunction.
struct Exponent {
  std::uint32_t count = 1;
  std::string index;

  bool symbolic() const { return !index.empty(); }
  bool operator==(const Exponent&) const = default;
};

struct FormulaNode;

// Immutable formula handle. Nodes are shared; `id()` identifies a node for memo tables.
class Formula {
public:
  static Formula top() { return make(Op::Top); }
  static Formula bottom() { return make(Op::Bottom); }
  static Formula prop(std::string name);
  static Formula neg(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula iff(Formula a, Formula b);
  static Formula diamond(Rel r, Formula f, Exponent e = {});
  static Formula box(Rel r, Formula f, Exponent e = {});
  static Formula big_and(std::string index, std::uint32_t lo, std::uint32_t hi, Formula body);

  Op op() const;
  Rel rel() const;
  const Exponent& exponent() const;
  const std::string& name() const; // proposition name or big-conjunction index
  std::uint32_t lo() const;
  std::uint32_t hi() const;
  const Formula& lhs() const;
  const Formula& rhs() const;
  const Formula& child() const { return lhs(); }

  const FormulaNode* id() const { return node_.get(); }

  // Number of nodes.
  std::size_t size() const;

  friend bool operator==(const Formula& a, const Formula& b);

private:
  static Formula make(Op op);
  static Formula binary(Op op, Formula a, Formula b);
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
  Op op = Op::Top;
  Rel rel = Rel::A;
  Exponent exp;
  std::string name;
  std::uint32_t lo = 0, hi = 0;
  std::optional<Formula> a, b;
};

inline Formula Formula::make(Op op) {
  auto n = std::make_shared<FormulaNode>();
  n->op = op;
  return Formula(std::move(n));
}
inline Formula Formula::prop(std::string name) {
  auto n = std::make_shared<FormulaNode>();
  n->op = Op::Prop;
  n->name = std::move(name);
  return Formula(std::move(n));
}
inline Formula Formula::neg(Formula f) {
  auto n = std::make_shared<FormulaNode>();
  n->op = Op::Not;
  n->a = std::move(f);
  return Formula(std::move(n));
}
inline Formula Formula::binary(Op op, Formula a, Formula b) {
  auto n = std::make_shared<FormulaNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return Formula(std::move(n));
}
inline Formula Formula::conj(Formula a, Formula b) { return binary(Op::And, std::move(a), std::move(b)); }
inline Formula Formula::disj(Formula a, Formula b) { return binary(Op::Or, std::move(a), std::move(b)); }
inline Formula Formula::implies(Formula a, Formula b) { return binary(Op::Implies, std::move(a), std::move(b)); }
inline Formula Formula::iff(Formula a, Formula b) { return binary(Op::Iff, std::move(a), std::move(b)); }
inline Formula Formula::diamond(Rel r, Formula f, Exponent e) {
  auto n = std::make_shared<FormulaNode>();
  n->op = Op::Diamond;
  n->rel = r;
  n->exp = std::move(e);
  n->a = std::move(f);
  return Formula(std::move(n));
}
inline Formula Formula::box(Rel r, Formula f, Exponent e) {
  auto n = std::make_shared<FormulaNode>();
  n->op = Op::Box;
  n->rel = r;
  n->exp = std::move(e);
  n->a = std::move(f);
  return Formula(std::move(n));
}
inline Formula Formula::big_and(std::string index, std::uint32_t lo, std::uint32_t hi, Formula body) {
  auto n = std::make_shared<FormulaNode>();
  n->op = Op::BigAnd;
  n->name = std::move(index);
  n->lo = lo;
  n->hi = hi;
  n->a = std::move(body);
  return Formula(std::move(n));
}

inline Op Formula::op() const { return node_->op; }
inline Rel Formula::rel() const { return node_->rel; }
inline const Exponent& Formula::exponent() const { return node_->exp; }
inline const std::string& Formula::name() const { return node_->name; }
inline std::uint32_t Formula::lo() const { return node_->lo; }
inline std::uint32_t Formula::hi() const { return node_->hi; }
inline const Formula& Formula::lhs() const { return *node_->a; }
inline const Formula& Formula::rhs() const { return *node_->b; }

inline std::size_t Formula::size() const {
  std::size_t n = 1;
  if (node_->a) n += node_->a->size();
  if (node_->b) n += node_->b->size();
  return n;
}

inline bool operator==(const Formula& x, const Formula& y) {
  if (x.node_ == y.node_) return true;
  const FormulaNode& a = *x.node_;
  const FormulaNode& b = *y.node_;
  if (a.op != b.op || a.name != b.name || a.lo != b.lo || a.hi != b.hi) return false;
  if ((a.op == Op::Diamond || a.op == Op::Box) && (a.rel != b.rel || !(a.exp == b.exp))) return false;
  if (a.a.has_value() != b.a.has_value() || a.b.has_value() != b.b.has_value()) return false;
  if (a.a && !(*a.a == *b.a)) return false;
  if (a.b && !(*a.b == *b.b)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(Op op) {
  switch (op) {
  case Op::Iff: return 1;
  case Op::Implies: return 2;
  case Op::Or: return 3;
  case Op::And: return 4;
  default: return 5;
  }
}

inline void print(const Formula& f, int min_prec, std::string& out) {
  int p = precedence(f.op());
  bool paren = p < min_prec;
  if (paren) out += '(';
  switch (f.op()) {
  case Op::Top: out += 'T'; break;
  case Op::Bottom: out += 'F'; break;
  case Op::Prop: out += f.name(); break;
  case Op::Not:
    out += '!';
    print(f.child(), 5, out);
    break;
  case Op::And:
  case Op::Or:
    print(f.lhs(), p, out);
    out += f.op() == Op::And ? " & " : " | ";
    print(f.rhs(), p + 1, out);
    break;
  case Op::Implies:
  case Op::Iff:
    print(f.lhs(), p + 1, out);
    out += f.op() == Op::Implies ? " -> " : " <-> ";
    print(f.rhs(), p, out);
    break;
  case Op::Diamond:
  case Op::Box: {
    bool d = f.op() == Op::Diamond;
    out += d ? '<' : '[';
    out += rel_name(f.rel());
    out += d ? '>' : ']';
    const Exponent& e = f.exponent();
    if (e.symbolic()) {
      out += '^' + e.index + ' ';
    } else if (e.count != 1) {
      out += '^' + std::to_string(e.count) + ' ';
    }
    print(f.child(), 5, out);
    break;
  }
  case Op::BigAnd:
    out += "AND " + f.name() + "=" + std::to_string(f.lo()) + ".." + std::to_string(f.hi()) + " (";
    print(f.child(), 0, out);
    out += ')';
    break;
  }
  if (paren) out += ')';
}

} // namespace detail

// Concrete syntax accepted by parse_formula().
inline std::string to_string(const Formula& f) {
  std::string out;
  detail::print(f, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   iff   := imp ('<->' iff)?
//   imp   := or ('->' imp)?
//   or    := and ('|' and)*
//   and   := unary ('&' unary)*
//   unary := '!' unary | '<' R '>' exp? unary | '[' R ']' exp? unary | atom
//   atom  := 'T' | 'F' | ident | '(' iff ')' | 'AND' ident '=' num '..' num '(' iff ')'
//   exp   := '^' (num | ident)
//   R     := one of A B E L D O, optionally followed by 'i' for the inverse relation

namespace detail {

enum class Tok { End, Ident, Num, LParen, RParen, LAngle, RAngle, LBrack, RBrack, Not, And, Or, Imp, Iff, Caret, Eq, DotDot };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line, column;
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    std::size_t l = line, cl = col;
    auto push = [&](Tok k, std::size_t n) {
      out.push_back({k, std::string(s.substr(i, n)), l, cl});
      advance(n);
    };
    if (s.substr(i, 3) == "<->") push(Tok::Iff, 3);
    else if (s.substr(i, 2) == "->") push(Tok::Imp, 2);
    else if (s.substr(i, 2) == "..") push(Tok::DotDot, 2);
    else if (c == '<') push(Tok::LAngle, 1);
    else if (c == '>') push(Tok::RAngle, 1);
    else if (c == '[') push(Tok::LBrack, 1);
    else if (c == ']') push(Tok::RBrack, 1);
    else if (c == '(') push(Tok::LParen, 1);
    else if (c == ')') push(Tok::RParen, 1);
    else if (c == '!' || c == '~') push(Tok::Not, 1);
    else if (c == '&') push(Tok::And, 1);
    else if (c == '|') push(Tok::Or, 1);
    else if (c == '^') push(Tok::Caret, 1);
    else if (c == '=') push(Tok::Eq, 1);
    else if (is_digit(c)) {
      std::size_t n = 0;
      while (i + n < s.size() && is_digit(s[i + n])) ++n;
      push(Tok::Num, n);
    } else if (is_alpha(c)) {
      std::size_t n = 0;
      while (i + n < s.size() && (is_alpha(s[i + n]) || is_digit(s[i + n]))) ++n;
      push(Tok::Ident, n);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class FormulaParser {
public:
  explicit FormulaParser(std::string_view text) : toks_(tokenize(text)) {}

  Formula parse() {
    Formula f = parse_iff();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(t.kind == Tok::End ? msg + " at end of input" : msg, t.line, t.column);
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }

  Formula parse_iff() {
    Formula lhs = parse_imp();
    if (accept(Tok::Iff)) return Formula::iff(lhs, parse_iff());
    return lhs;
  }
  Formula parse_imp() {
    Formula lhs = parse_or();
    if (accept(Tok::Imp)) return Formula::implies(lhs, parse_imp());
    return lhs;
  }
  Formula parse_or() {
    Formula f = parse_and();
    while (accept(Tok::Or)) f = Formula::disj(f, parse_and());
    return f;
  }
  Formula parse_and() {
    Formula f = parse_unary();
    while (accept(Tok::And)) f = Formula::conj(f, parse_unary());
    return f;
  }

  std::uint32_t parse_number() {
    if (peek().kind != Tok::Num) fail("expected a number");
    const std::string& t = peek().text;
    if (t.size() > 10 || std::stoull(t) > (std::uint64_t{1} << 31)) fail("exponent overflow: " + t + " exceeds 2^31");
    ++pos_;
    return static_cast<std::uint32_t>(std::stoull(t));
  }

  Rel parse_rel() {
    if (peek().kind != Tok::Ident) fail("expected a relation name");
    std::string t = take().text;
    static const std::map<std::string, Rel> rels = {
        {"A", Rel::A}, {"Ai", Rel::Abar}, {"B", Rel::B}, {"Bi", Rel::Bbar}, {"E", Rel::E}, {"Ei", Rel::Ebar},
        {"L", Rel::L}, {"Li", Rel::Lbar}, {"D", Rel::D}, {"Di", Rel::Dbar}, {"O", Rel::O}, {"Oi", Rel::Obar}};
    auto it = rels.find(t);
    if (it == rels.end()) {
      --pos_;
      fail("unknown relation '" + t + "'");
    }
    return it->second;
  }

  Exponent parse_exponent() {
    Exponent e;
    if (!accept(Tok::Caret)) return e;
    if (peek().kind == Tok::Ident) {
      const std::string& name = peek().text;
      if (std::find(indices_.begin(), indices_.end(), name) == indices_.end())
        fail("exponent '" + name + "' is not a bound index");
      e.index = take().text;
      e.count = 0;
      return e;
    }
    e.count = parse_number();
    return e;
  }

  Formula parse_unary() {
    if (accept(Tok::Not)) return Formula::neg(parse_unary());
    if (peek().kind == Tok::LAngle || peek().kind == Tok::LBrack) {
      bool diamond = take().kind == Tok::LAngle;
      Rel r = parse_rel();
      expect(diamond ? Tok::RAngle : Tok::RBrack, diamond ? "'>'" : "']'");
      Exponent e = parse_exponent();
      Formula body = parse_unary();
      return diamond ? Formula::diamond(r, body, e) : Formula::box(r, body, e);
    }
    return parse_atom();
  }

  Formula parse_atom() {
    if (accept(Tok::LParen)) {
      Formula f = parse_iff();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (peek().kind != Tok::Ident) fail(peek().kind == Tok::End ? "expected a formula" : "unexpected '" + peek().text + "'");
    std::string t = take().text;
    if (t == "T") return Formula::top();
    if (t == "F") return Formula::bottom();
    if (t == "AND") {
      if (peek().kind != Tok::Ident) fail("expected an index name");
      std::string idx = take().text;
      expect(Tok::Eq, "'='");
      std::uint32_t lo = parse_number();
      expect(Tok::DotDot, "'..'");
      std::uint32_t hi = parse_number();
      if (lo > hi) fail("empty index range");
      expect(Tok::LParen, "'('");
      indices_.push_back(idx);
      Formula body = parse_iff();
      indices_.pop_back();
      expect(Tok::RParen, "')'");
      return Formula::big_and(idx, lo, hi, body);
    }
    if (std::find(indices_.begin(), indices_.end(), t) != indices_.end()) {
      --pos_;
      fail("index '" + t + "' may only appear in exponents");
    }
    return Formula::prop(t);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> indices_;
};

} // namespace detail

inline Formula parse_formula(std::string_view text) { return detail::FormulaParser(text).parse(); }

// ---------------------------------------------------------------------------
// Rewriting

inline constexpr std::size_t kMaxExpandedSize = 10'000'000;

namespace detail {

inline Formula expand(const Formula& f, std::map<std::string, std::uint32_t>& env, std::size_t& budget) {
  if (budget == 0) throw ResourceError("expanded formula exceeds " + std::to_string(kMaxExpandedSize) + " nodes");
  --budget;
  switch (f.op()) {
  case Op::Top:
  case Op::Bottom:
  case Op::Prop: return f;
  case Op::Not: return Formula::neg(expand(f.child(), env, budget));
  case Op::And: return Formula::conj(expand(f.lhs(), env, budget), expand(f.rhs(), env, budget));
  case Op::Or: return Formula::disj(expand(f.lhs(), env, budget), expand(f.rhs(), env, budget));
  case Op::Implies: return Formula::implies(expand(f.lhs(), env, budget), expand(f.rhs(), env, budget));
  case Op::Iff: return Formula::iff(expand(f.lhs(), env, budget), expand(f.rhs(), env, budget));
  case Op::Diamond:
  case Op::Box: {
    std::uint32_t n = f.exponent().count;
    if (f.exponent().symbolic()) {
      auto it = env.find(f.exponent().index);
      if (it == env.end()) throw ParseError("unbound exponent index '" + f.exponent().index + "'");
      n = it->second;
    }
    Formula body = expand(f.child(), env, budget);
    if (n > budget) throw ResourceError("expanded formula exceeds " + std::to_string(kMaxExpandedSize) + " nodes");
    budget -= n;
    for (std::uint32_t i = 0; i < n; ++i)
      body = f.op() == Op::Diamond ? Formula::diamond(f.rel(), body) : Formula::box(f.rel(), body);
    return body;
  }
  case Op::BigAnd: {
    auto found = env.find(f.name());
    const bool shadowed = found != env.end();
    const std::uint32_t saved = shadowed ? found->second : 0;
    std::optional<Formula> acc;
    for (std::uint64_t i = f.lo(); i <= f.hi(); ++i) {
      env[f.name()] = static_cast<std::uint32_t>(i);
      Formula part = expand(f.child(), env, budget);
      acc = acc ? Formula::conj(*acc, part) : part;
    }
    if (shadowed) env[f.name()] = saved;
    else env.erase(f.name());
    return acc ? *acc : Formula::top();
  }
  }
  return f;
}

inline std::pair<Rel, Rel> derived_pair(Rel r) {
  switch (r) {
  case Rel::L: return {Rel::A, Rel::A};
  case Rel::Lbar: return {Rel::Abar, Rel::Abar};
  case Rel::D: return {Rel::B, Rel::E};
  case Rel::Dbar: return {Rel::Bbar, Rel::Ebar};
  case Rel::O: return {Rel::E, Rel::Bbar};
  case Rel::Obar: return {Rel::B, Rel::Ebar};
  default: return {r, r};
  }
}

inline bool has_sugar(const Formula& f) {
  if (f.op() == Op::BigAnd) return true;
  if ((f.op() == Op::Diamond || f.op() == Op::Box) && (f.exponent().symbolic() || f.exponent().count != 1))
    return true;
  if (f.op() == Op::Not || f.op() == Op::Diamond || f.op() == Op::Box) return has_sugar(f.child());
  if (f.op() == Op::And || f.op() == Op::Or || f.op() == Op::Implies || f.op() == Op::Iff)
    return has_sugar(f.lhs()) || has_sugar(f.rhs());
  return false;
}

inline Formula desugar_expanded(const Formula& f) {
  switch (f.op()) {
  case Op::Top:
  case Op::Bottom:
  case Op::Prop: return f;
  case Op::Not: return Formula::neg(desugar_expanded(f.child()));
  case Op::And: return Formula::conj(desugar_expanded(f.lhs()), desugar_expanded(f.rhs()));
  case Op::Or: return Formula::disj(desugar_expanded(f.lhs()), desugar_expanded(f.rhs()));
  case Op::Implies: return Formula::disj(Formula::neg(desugar_expanded(f.lhs())), desugar_expanded(f.rhs()));
  case Op::Iff: {
    Formula a = desugar_expanded(f.lhs());
    Formula b = desugar_expanded(f.rhs());
    return Formula::conj(Formula::disj(Formula::neg(a), b), Formula::disj(Formula::neg(b), a));
  }
  case Op::Diamond:
  case Op::Box: {
    Formula body = desugar_expanded(f.child());
    auto wrap = [&](Rel r, Formula x) { return f.op() == Op::Diamond ? Formula::diamond(r, x) : Formula::box(r, x); };
    if (is_primitive(f.rel())) return wrap(f.rel(), body);
    auto [outer, inner] = derived_pair(f.rel());
    return wrap(outer, wrap(inner, body));
  }
  case Op::BigAnd: break;
  }
  throw Error("desugar: unexpanded big conjunction");
}

} // namespace detail

// Unfolds exponents and big conjunctions.
inline Formula expand(const Formula& f) {
  std::map<std::string, std::uint32_t> env;
  std::size_t budget = kMaxExpandedSize;
  return detail::expand(f, env, budget);
}

// Rewrites ->, <->, and derived relations into the core {T, F, p, !, &, |, <X>, [X]} over A, Ai, B, Bi, E, Ei.
inline Formula desugar(const Formula& f) {
  return detail::desugar_expanded(detail::has_sugar(f) ? expand(f) : f);
}

// Bitmask over Rel of the primitive relations occurring in a desugared formula.
inline unsigned modalities(const Formula& f) {
  switch (f.op()) {
  case Op::Top:
  case Op::Bottom:
  case Op::Prop: return 0;
  case Op::Diamond:
  case Op::Box: return (1U << static_cast<unsigned>(f.rel())) | modalities(f.child());
  case Op::Not:
  case Op::BigAnd: return modalities(f.child());
  default: return modalities(f.lhs()) | modalities(f.rhs());
  }
}

inline constexpr unsigned rel_bit(Rel r) { return 1U << static_cast<unsigned>(r); }

inline bool is_propositional(const Formula& f) {
  switch (f.op()) {
  case Op::Top:
  case Op::Bottom:
  case Op::Prop: return true;
  case Op::Diamond:
  case Op::Box:
  case Op::BigAnd: return false;
  case Op::Not: return is_propositional(f.child());
  default: return is_propositional(f.lhs()) && is_propositional(f.rhs());
  }
}

// Number of nested B modalities. Rejects E (and relations built from it).
inline unsigned nest_b(const Formula& f) {
  switch (f.op()) {
  case Op::Top:
  case Op::Bottom:
  case Op::Prop: return 0;
  case Op::Not: return nest_b(f.child());
  case Op::BigAnd: return nest_b(expand(f));
  case Op::And:
  case Op::Or:
  case Op::Implies:
  case Op::Iff: return std::max(nest_b(f.lhs()), nest_b(f.rhs()));
  case Op::Diamond:
  case Op::Box: {
    if (f.exponent().symbolic() || f.exponent().count != 1) return nest_b(expand(f));
    switch (f.rel()) {
    case Rel::E:
    case Rel::D:
    case Rel::O: throw FragmentError("nest_b: the E modality is outside the supported fragment");
    case Rel::B:
    case Rel::Obar: return 1 + nest_b(f.child());
    default: return nest_b(f.child());
    }
  }
  }
  return 0;
}

namespace detail {

inline bool forall_shape(const Formula& f) {
  if (is_propositional(f)) return true;
  if (f.op() == Op::And) return forall_shape(f.lhs()) && forall_shape(f.rhs());
  if (f.op() == Op::Box)
    return (f.rel() == Rel::A || f.rel() == Rel::Abar || f.rel() == Rel::B || f.rel() == Rel::E) &&
           forall_shape(f.child());
  return false;
}

inline bool exists_shape(const Formula& f) {
  if (is_propositional(f)) return true;
  if (f.op() == Op::Or) return exists_shape(f.lhs()) && exists_shape(f.rhs());
  if (f.op() == Op::Diamond)
    return (f.rel() == Rel::A || f.rel() == Rel::Abar || f.rel() == Rel::B || f.rel() == Rel::E) &&
           exists_shape(f.child());
  return false;
}

inline Formula negate(const Formula& f) { return f.op() == Op::Not ? f.child() : Formula::neg(f); }

inline Formula exists_dual(const Formula& f) {
  if (is_propositional(f)) return negate(f);
  if (f.op() == Op::And) return Formula::disj(exists_dual(f.lhs()), exists_dual(f.rhs()));
  return Formula::diamond(f.rel(), exists_dual(f.child()));
}

} // namespace detail

// Membership in the universal fragment (conjunctions and boxes over A, Ai, B, E above propositional leaves).
inline bool in_forall_fragment(const Formula& f) { return detail::forall_shape(desugar(f)); }
// Membership in the existential fragment (disjunctions and diamonds over A, Ai, B, E above propositional leaves).
inline bool in_exists_fragment(const Formula& f) { return detail::exists_shape(desugar(f)); }

// First class, in the order of FragmentClass, whose grammar admits the desugared formula.
inline FragmentClass classify(const Formula& f) {
  Formula g = desugar(f);
  unsigned m = modalities(g);
  if (m == 0) return FragmentClass::Prop;
  if (detail::forall_shape(g)) return FragmentClass::ForallAAbarBE;
  if (detail::exists_shape(g)) return FragmentClass::ExistsAAbarBE;
  auto within = [m](unsigned allowed) { return (m & ~allowed) == 0; };
  unsigned aa = rel_bit(Rel::A) | rel_bit(Rel::Abar);
  if (within(aa)) return FragmentClass::AAbar;
  unsigned be = aa | rel_bit(Rel::Bbar) | rel_bit(Rel::Ebar);
  if (within(be)) return FragmentClass::AAbarBbarEbar;
  if (within(be | rel_bit(Rel::B))) return FragmentClass::AAbarBBbarEbar;
  return FragmentClass::OutOfScope;
}

// Existential formula equivalent to the negation of a universal one.
inline Formula to_exists_dual(const Formula& f) {
  Formula g = desugar(f);
  if (!detail::forall_shape(g)) throw FragmentError("formula is not in the universal A/Ai/B/E fragment");
  return detail::exists_dual(g);
}

// Formula true exactly on tracks of length k: [B]^(k-1) F & <B>^(k-2) T.
inline Formula make_ell(std::uint32_t k) {
  if (k < 2) throw Error("length formula needs k >= 2");
  return Formula::conj(Formula::box(Rel::B, Formula::bottom(), Exponent{k - 1, {}}),
                       Formula::diamond(Rel::B, Formula::top(), Exponent{k - 2, {}}));
}

} // namespace hsmc

#pragma once

// Reference semantics for HS formulas over Kripke structures. Nothing here depends on descriptors,
// unravelling or the checkers; only the structure and formula layers are shared.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hsmc/formula.hpp"
#include "hsmc/kripke.hpp"

namespace hsmc {

struct OracleConfig {
  enum class Mode {
    Automaton, // exact, for every primitive relation
    Bounded,   // enumerates tracks literally, cut at depth_bound
  };
  Mode mode = Mode::Automaton;
  // Bounded mode: longest track enumerated for A, Ai and for the initial tracks of a structure check;
  // also the most states added by one Bi or Ei extension.
  std::size_t depth_bound = 0;
};

struct OracleVerdict {
  bool holds = true;
  std::optional<Track> counterexample;
};

namespace oracle_detail {

// ---------------------------------------------------------------------------
// Literal evaluation with a length cut-off.

class BoundedEvaluator {
public:
  BoundedEvaluator(const KripkeStructure& k, std::size_t bound) : k_(k), bound_(bound) {
    if (bound < 2) throw Error("oracle depth bound must be at least 2");
  }

  bool eval(const Formula& f, const std::vector<StateId>& rho) {
    switch (f.op()) {
    case Op::Top: return true;
    case Op::Bottom: return false;
    case Op::Prop: {
      StateSet h = k_.holds(f.name());
      return std::all_of(rho.begin(), rho.end(), [&](StateId s) { return h.contains(s); });
    }
    case Op::Not: return !eval(f.child(), rho);
    case Op::And: return eval(f.lhs(), rho) && eval(f.rhs(), rho);
    case Op::Or: return eval(f.lhs(), rho) || eval(f.rhs(), rho);
    case Op::Implies: return !eval(f.lhs(), rho) || eval(f.rhs(), rho);
    case Op::Iff: return eval(f.lhs(), rho) == eval(f.rhs(), rho);
    case Op::Diamond:
    case Op::Box: break;
    case Op::BigAnd: throw Error("oracle: unexpanded formula");
    }
    Key key{f.id(), rho};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool want = f.op() == Op::Diamond;
    auto hit = [&](const std::vector<StateId>& t) { return eval(f.child(), t) == want; };
    bool found = false;
    switch (f.rel()) {
    case Rel::A: found = paths_from(rho.back(), bound_, hit); break;
    case Rel::Abar: found = paths_to(rho.front(), bound_, hit); break;
    case Rel::B:
      for (std::size_t len = 2; len < rho.size() && !found; ++len)
        found = hit(std::vector<StateId>(rho.begin(), rho.begin() + static_cast<std::ptrdiff_t>(len)));
      break;
    case Rel::E:
      for (std::size_t i = 1; i + 2 <= rho.size() && !found; ++i)
        found = hit(std::vector<StateId>(rho.begin() + static_cast<std::ptrdiff_t>(i), rho.end()));
      break;
    case Rel::Bbar: {
      std::vector<StateId> t = rho;
      found = extend_right(t, bound_, hit);
      break;
    }
    case Rel::Ebar: {
      std::vector<StateId> t = rho;
      found = extend_left(t, bound_, hit);
      break;
    }
    default: throw Error("oracle: derived relation left in formula");
    }
    bool r = want ? found : !found;
    memo_.emplace(std::move(key), r);
    return r;
  }

  // Tracks from v of length 2..max_len, depth first in successor order.
  template <class Fn>
  bool paths_from(StateId v, std::size_t max_len, Fn&& fn) {
    std::vector<StateId> t{v};
    return grow_right(t, max_len, fn);
  }

  template <class Fn>
  bool paths_to(StateId v, std::size_t max_len, Fn&& fn) {
    std::vector<StateId> rev{v};
    return grow_left(rev, max_len, fn);
  }

private:
  template <class Fn>
  bool grow_right(std::vector<StateId>& t, std::size_t max_len, Fn& fn) {
    if (t.size() >= max_len) return false;
    for (StateId u : k_.successors(t.back())) {
      t.push_back(u);
      bool r = fn(t) || grow_right(t, max_len, fn);
      t.pop_back();
      if (r) return true;
    }
    return false;
  }

  template <class Fn>
  bool grow_left(std::vector<StateId>& rev, std::size_t max_len, Fn& fn) {
    if (rev.size() >= max_len) return false;
    for (StateId u : k_.predecessors(rev.back())) {
      rev.push_back(u);
      std::vector<StateId> t(rev.rbegin(), rev.rend());
      bool r = fn(t) || grow_left(rev, max_len, fn);
      rev.pop_back();
      if (r) return true;
    }
    return false;
  }

  template <class Fn>
  bool extend_right(std::vector<StateId>& t, std::size_t extra, Fn& fn) {
    if (extra == 0) return false;
    for (StateId u : k_.successors(t.back())) {
      t.push_back(u);
      bool r = fn(t) || extend_right(t, extra - 1, fn);
      t.pop_back();
      if (r) return true;
    }
    return false;
  }

  template <class Fn>
  bool extend_left(std::vector<StateId>& t, std::size_t extra, Fn& fn) {
    if (extra == 0) return false;
    for (StateId u : k_.predecessors(t.front())) {
      t.insert(t.begin(), u);
      bool r = fn(t) || extend_left(t, extra - 1, fn);
      t.erase(t.begin());
      if (r) return true;
    }
    return false;
  }

  struct Key {
    const FormulaNode* node;
    std::vector<StateId> track;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::size_t h = std::hash<const void*>{}(k.node);
      for (StateId s : k.track) h = h * 131 + s;
      return h;
    }
  };

  const KripkeStructure& k_;
  std::size_t bound_;
  std::unordered_map<Key, bool, KeyHash> memo_;
};

// ---------------------------------------------------------------------------
// Exact evaluation. Tracks are words over the state alphabet, and the set of tracks satisfying a
// formula is a regular language; each connective is a closure operation on complete DFAs.

struct Dfa {
  std::size_t letters = 0;
  std::uint32_t initial = 0;
  std::vector<std::uint32_t> delta; // state * letters + letter
  std::vector<char> accepting;

  std::size_t size() const { return accepting.size(); }
  std::uint32_t step(std::uint32_t q, std::size_t a) const { return delta[q * letters + a]; }

  std::uint32_t run(std::span<const StateId> w) const {
    std::uint32_t q = initial;
    for (StateId a : w) q = step(q, a);
    return q;
  }
  bool accepts(std::span<const StateId> w) const { return accepting[run(w)]; }
};

// Reachable part of an automaton given by an initial state, a transition function and acceptance.
template <class S, class Next, class Acc>
Dfa explore(std::size_t letters, S init, Next next, Acc acc) {
  Dfa d;
  d.letters = letters;
  std::map<S, std::uint32_t> ids;
  std::vector<S> states;
  ids.emplace(init, 0);
  states.push_back(init);
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t a = 0; a < letters; ++a) {
      S s = next(states[i], a);
      auto [it, fresh] = ids.emplace(s, static_cast<std::uint32_t>(states.size()));
      if (fresh) states.push_back(s);
      d.delta.push_back(it->second);
    }
  }
  for (const S& s : states) d.accepting.push_back(acc(s) ? 1 : 0);
  return d;
}

// Moore partition refinement.
inline Dfa minimize(const Dfa& d) {
  const std::size_t n = d.size();
  std::vector<std::uint32_t> cls(n);
  for (std::size_t q = 0; q < n; ++q) cls[q] = d.accepting[q] ? 1 : 0;
  std::size_t count = 0;
  for (;;) {
    std::map<std::vector<std::uint32_t>, std::uint32_t> sig;
    std::vector<std::uint32_t> next(n);
    for (std::size_t q = 0; q < n; ++q) {
      std::vector<std::uint32_t> s{cls[q]};
      for (std::size_t a = 0; a < d.letters; ++a) s.push_back(cls[d.step(static_cast<std::uint32_t>(q), a)]);
      next[q] = sig.emplace(std::move(s), static_cast<std::uint32_t>(sig.size())).first->second;
    }
    cls = std::move(next);
    if (sig.size() == count) break;
    count = sig.size();
  }
  Dfa m;
  m.letters = d.letters;
  m.initial = cls[d.initial];
  m.delta.assign(count * d.letters, 0);
  m.accepting.assign(count, 0);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t a = 0; a < d.letters; ++a) m.delta[cls[q] * d.letters + a] = cls[d.step(static_cast<std::uint32_t>(q), a)];
    m.accepting[cls[q]] = d.accepting[q];
  }
  return m;
}

class LanguageBuilder {
public:
  explicit LanguageBuilder(const KripkeStructure& k) : k_(k), n_(k.num_states()) {}

  // Words forming tracks whose first letter is in `first` and every letter is in `allowed`,
  // ending in `last`.
  Dfa tracks(StateSet first, StateSet allowed, StateSet last) const {
    // 0: empty word, 1+v: one letter, 1+n+v: two or more letters, 1+2n: dead
    const std::uint32_t dead = static_cast<std::uint32_t>(1 + 2 * n_);
    return explore(
        n_, std::uint32_t{0},
        [&, dead](std::uint32_t q, std::size_t a) -> std::uint32_t {
          auto v = static_cast<StateId>(a);
          if (q == dead || !allowed.contains(v)) return dead;
          if (q == 0) return first.contains(v) ? 1 + v : dead;
          StateId prev = static_cast<StateId>(q <= n_ ? q - 1 : q - 1 - n_);
          return k_.has_edge(prev, v) ? static_cast<std::uint32_t>(1 + n_ + v) : dead;
        },
        [&, dead](std::uint32_t q) { return q != dead && q > n_ && last.contains(static_cast<StateId>(q - 1 - n_)); });
  }

  Dfa all_tracks() const {
    StateSet w = StateSet::all(n_);
    return tracks(w, w, w);
  }

  const Dfa& language(const Formula& f) {
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    Dfa d = minimize(build(f));
    held_.push_back(f);
    return memo_.emplace(f.id(), std::move(d)).first->second;
  }

private:
  static Dfa product(const Dfa& x, const Dfa& y, const std::function<bool(bool, bool)>& op) {
    using P = std::pair<std::uint32_t, std::uint32_t>;
    return explore(
        x.letters, P{x.initial, y.initial}, [&](P p, std::size_t a) { return P{x.step(p.first, a), y.step(p.second, a)}; },
        [&](P p) { return op(x.accepting[p.first] != 0, y.accepting[p.second] != 0); });
  }

  Dfa restrict_to_tracks(const Dfa& d) const {
    return minimize(product(all_tracks(), d, [](bool a, bool b) { return a && b; }));
  }

  // States from which an accepting state is reachable in zero or more steps.
  static std::vector<char> coreachable(const Dfa& d) {
    std::vector<char> co(d.accepting.begin(), d.accepting.end());
    for (bool changed = true; changed;) {
      changed = false;
      for (std::uint32_t q = 0; q < d.size(); ++q) {
        if (co[q]) continue;
        for (std::size_t a = 0; a < d.letters && !co[q]; ++a)
          if (co[d.step(q, a)]) co[q] = changed = true;
      }
    }
    return co;
  }

  Dfa build(const Formula& f) {
    const StateSet w = StateSet::all(n_);
    switch (f.op()) {
    case Op::Top: return all_tracks();
    case Op::Bottom: return tracks({}, {}, {});
    case Op::Prop: {
      StateSet h = k_.holds(f.name());
      return tracks(w, h, w);
    }
    case Op::Not:
      return product(all_tracks(), language(f.child()), [](bool a, bool b) { return a && !b; });
    case Op::And: return product(language(f.lhs()), language(f.rhs()), [](bool a, bool b) { return a && b; });
    case Op::Or: return product(language(f.lhs()), language(f.rhs()), [](bool a, bool b) { return a || b; });
    case Op::Implies:
      return product(all_tracks(), build(Formula::disj(Formula::neg(f.lhs()), f.rhs())), [](bool a, bool b) { return a && b; });
    case Op::Iff:
      return build(Formula::conj(Formula::implies(f.lhs(), f.rhs()), Formula::implies(f.rhs(), f.lhs())));
    case Op::BigAnd: throw Error("oracle: unexpanded formula");
    case Op::Diamond:
    case Op::Box: break;
    }
    if (f.op() == Op::Box) {
      Formula dual = Formula::neg(Formula::diamond(f.rel(), Formula::neg(f.child())));
      held_.push_back(dual);
      return build(dual);
    }
    const Dfa& g = language(f.child());
    switch (f.rel()) {
    case Rel::A: {
      StateSet firsts;
      auto co = coreachable(g);
      for (StateId v = 0; v < n_; ++v)
        if (co[g.step(g.initial, v)]) firsts.insert(v);
      return tracks(w, w, firsts);
    }
    case Rel::Abar: {
      // last letters of accepted words
      StateSet lasts;
      std::vector<char> seen(g.size(), 0);
      std::deque<std::uint32_t> queue{g.initial};
      seen[g.initial] = 1;
      while (!queue.empty()) {
        std::uint32_t q = queue.front();
        queue.pop_front();
        for (StateId v = 0; v < n_; ++v) {
          std::uint32_t r = g.step(q, v);
          if (g.accepting[r]) lasts.insert(v);
          if (!seen[r]) {
            seen[r] = 1;
            queue.push_back(r);
          }
        }
      }
      return tracks(lasts, w, w);
    }
    case Rel::B: {
      using P = std::pair<std::uint32_t, bool>;
      Dfa d = explore(
          n_, P{g.initial, false}, [&](P p, std::size_t a) { return P{g.step(p.first, a), p.second || g.accepting[p.first]}; },
          [](P p) { return p.second; });
      return restrict_to_tracks(d);
    }
    case Rel::Bbar: {
      auto co = coreachable(g);
      Dfa d = g;
      for (std::uint32_t q = 0; q < g.size(); ++q) {
        bool any = false;
        for (std::size_t a = 0; a < n_ && !any; ++a) any = co[g.step(q, a)];
        d.accepting[q] = any;
      }
      return restrict_to_tracks(d);
    }
    case Rel::E: {
      using S = std::vector<std::uint32_t>;
      Dfa d = explore(
          n_, S{},
          [&](const S& s, std::size_t a) {
            S t;
            for (auto q : s) t.push_back(g.step(q, a));
            t.push_back(g.initial);
            std::sort(t.begin(), t.end());
            t.erase(std::unique(t.begin(), t.end()), t.end());
            return t;
          },
          [&](const S& s) { return std::any_of(s.begin(), s.end(), [&](auto q) { return g.accepting[q] != 0; }); });
      return restrict_to_tracks(d);
    }
    case Rel::Ebar: {
      using S = std::vector<std::uint32_t>;
      // states reached by nonempty words
      std::vector<char> seen(g.size(), 0);
      std::deque<std::uint32_t> queue{g.initial};
      std::vector<char> expanded(g.size(), 0);
      expanded[g.initial] = 1;
      while (!queue.empty()) {
        std::uint32_t q = queue.front();
        queue.pop_front();
        for (std::size_t a = 0; a < n_; ++a) {
          std::uint32_t r = g.step(q, a);
          seen[r] = 1;
          if (!expanded[r]) {
            expanded[r] = 1;
            queue.push_back(r);
          }
        }
      }
      S start;
      for (std::uint32_t q = 0; q < g.size(); ++q)
        if (seen[q]) start.push_back(q);
      Dfa d = explore(
          n_, start,
          [&](const S& s, std::size_t a) {
            S t;
            for (auto q : s) t.push_back(g.step(q, a));
            std::sort(t.begin(), t.end());
            t.erase(std::unique(t.begin(), t.end()), t.end());
            return t;
          },
          [&](const S& s) { return std::any_of(s.begin(), s.end(), [&](auto q) { return g.accepting[q] != 0; }); });
      return restrict_to_tracks(d);
    }
    default: throw Error("oracle: derived relation left in formula");
    }
  }

  const KripkeStructure& k_;
  std::size_t n_;
  std::vector<Formula> held_;
  std::unordered_map<const FormulaNode*, Dfa> memo_;
};

} // namespace oracle_detail

// K, rho |= psi.
inline bool oracle_eval(const KripkeStructure& k, const Track& rho, const Formula& psi, const OracleConfig& cfg = {}) {
  Formula g = desugar(psi);
  if (cfg.mode == OracleConfig::Mode::Bounded)
    return oracle_detail::BoundedEvaluator(k, cfg.depth_bound).eval(g, rho.vec());
  oracle_detail::LanguageBuilder lb(k);
  return lb.language(g).accepts(rho.states());
}

// K |= psi: every initial track satisfies psi. In bounded mode only initial tracks up to the depth
// bound are examined.
inline OracleVerdict oracle_mod_check(const KripkeStructure& k, const Formula& psi, const OracleConfig& cfg = {}) {
  Formula g = desugar(psi);
  if (cfg.mode == OracleConfig::Mode::Bounded) {
    oracle_detail::BoundedEvaluator ev(k, cfg.depth_bound);
    std::optional<Track> ce;
    ev.paths_from(k.initial(), cfg.depth_bound, [&](const std::vector<StateId>& t) {
      if (ev.eval(g, t)) return false;
      ce = Track(t);
      return true;
    });
    return {!ce.has_value(), ce};
  }
  oracle_detail::LanguageBuilder lb(k);
  const auto& lang = lb.language(g);
  StateSet w = StateSet::all(k.num_states());
  auto init = lb.tracks(StateSet::single(k.initial()), w, w);
  // shortest initial track outside the language
  using P = std::pair<std::uint32_t, std::uint32_t>;
  std::map<P, std::pair<P, StateId>> parent;
  std::deque<P> queue;
  P start{init.initial, lang.initial};
  parent.emplace(start, std::make_pair(start, StateId{0}));
  queue.push_back(start);
  while (!queue.empty()) {
    P p = queue.front();
    queue.pop_front();
    if (init.accepting[p.first] && !lang.accepting[p.second]) {
      std::vector<StateId> word;
      for (P q = p; q != start; q = parent.at(q).first) word.push_back(parent.at(q).second);
      std::reverse(word.begin(), word.end());
      return {false, Track(std::move(word))};
    }
    for (StateId a = 0; a < k.num_states(); ++a) {
      P q{init.step(p.first, a), lang.step(p.second, a)};
      if (parent.emplace(q, std::make_pair(p, a)).second) queue.push_back(q);
    }
  }
  return {true, std::nullopt};
}

} // namespace hsmc

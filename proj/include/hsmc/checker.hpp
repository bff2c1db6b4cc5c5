#pragma once

#include <algorithm>
#include <atomic>
#include <list>
#include <optional>
#include <thread>
#include <unordered_map>
#include <vector>

#include "hsmc/descriptor.hpp"
#include "hsmc/formula.hpp"
#include "hsmc/kripke.hpp"
#include "hsmc/summary.hpp"
#include "hsmc/unravel.hpp"

namespace hsmc {

// Summary: one shortest representative per summary class (see SummaryChecker).
// Unravel: every representative of the bounded unravelling, checked recursively.
enum class Method { Summary, Unravel };

struct CheckOptions {
  Method method = Method::Summary;
  // Unravel each modal subformula at its own B-nesting depth instead of the global one.
  bool tighten_budget = true;
  std::size_t cache_capacity = 1 << 18;
  // Representative lists kept per (state, budget, direction), counted in tracks.
  std::size_t rep_cache_tracks = 1 << 20;
  unsigned jobs = 1;
  // Refuse when tau(|W|, k) exceeds this; 0 disables the guard.
  std::size_t max_tau = 0;
};

struct Verdict {
  bool holds = true;
  std::optional<Track> counterexample;
};

namespace detail {

template <class Key, class Value, class Hash>
class LruCache {
public:
  explicit LruCache(std::size_t capacity) : cap_(capacity) {}

  const Value* find(const Key& k) {
    auto it = map_.find(k);
    if (it == map_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second.second);
    return &it->second.first;
  }

  void put(const Key& k, Value v) {
    if (cap_ == 0) return;
    if (auto it = map_.find(k); it != map_.end()) {
      it->second.first = std::move(v);
      return;
    }
    if (map_.size() >= cap_) {
      map_.erase(order_.back());
      order_.pop_back();
    }
    order_.push_front(k);
    map_.emplace(k, std::make_pair(std::move(v), order_.begin()));
  }

private:
  std::size_t cap_;
  std::list<Key> order_;
  std::unordered_map<Key, std::pair<Value, typename std::list<Key>::iterator>, Hash> map_;
};

struct TrackKey {
  const FormulaNode* node;
  std::vector<StateId> track;
  bool operator==(const TrackKey&) const = default;
};
struct TrackKeyHash {
  std::size_t operator()(const TrackKey& k) const noexcept {
    std::size_t h = std::hash<const void*>{}(k.node);
    for (StateId s : k.track) h = h * 31 + s;
    return h;
  }
};
struct ElementKey {
  const FormulaNode* node;
  DescriptorElement element;
  bool operator==(const ElementKey&) const = default;
};
struct ElementKeyHash {
  std::size_t operator()(const ElementKey& k) const noexcept {
    return std::hash<const void*>{}(k.node) * 31 + std::hash<DescriptorElement>{}(k.element);
  }
};

} // namespace detail

// Evaluates formulas of the A, Ai, B, Bi, Ei fragment on tracks by recursing over representatives.
// Every cached value is the truth value of the subformula on the track, so caches are shared across
// budgets. Cache keys are chosen by what the value can depend on: the endpoint for A and Ai, the
// descriptor element for subformulas without B, and the whole track otherwise.
class RepresentativeChecker {
public:
  explicit RepresentativeChecker(const KripkeStructure& k, CheckOptions opt = {})
      : k_(k), opt_(opt), track_cache_(opt.cache_capacity) {}

  // K, rho |= psi, computed with budget k >= nest_b(psi).
  bool check(unsigned k, const Formula& psi, const Track& rho) {
    Formula g = prepare(psi);
    if (nest_b(g) > k) throw FragmentError("budget below the B-nesting depth of the formula");
    return eval(k, g, rho.states());
  }

  // K, rho |= psi with the budget set to nest_b(psi).
  bool holds(const Formula& psi, const Track& rho) {
    Formula g = prepare(psi);
    return eval(nest_b(g), g, rho.states());
  }

  Verdict mod_check(const Formula& psi) {
    Formula g = prepare(psi);
    unsigned k = nest_b(g);
    guard_tau(k);
    Unraveller u(k_, k_.initial(), k, Direction::Forward);
    while (auto rho = u.next()) {
      if (!eval(k, g, rho->states())) return {false, std::move(*rho)};
    }
    return {true, std::nullopt};
  }

  void guard_tau(unsigned k) const {
    if (opt_.max_tau == 0) return;
    BigInt t = tau(k_.num_states(), k);
    if (t > BigInt(opt_.max_tau))
      throw ResourceError("tau(" + std::to_string(k_.num_states()) + ", " + std::to_string(k) + ") = " + t.str() +
                          " exceeds the ceiling " + std::to_string(opt_.max_tau));
  }

  // Desugars and validates a formula, keeping it alive for the node-keyed caches.
  Formula prepare(const Formula& psi) {
    if (info_.count(psi.id())) return psi;
    Formula g = desugar(psi);
    if (modalities(g) & (rel_bit(Rel::E))) throw FragmentError("the E modality is outside the supported fragment");
    held_.push_back(g);
    annotate(g);
    return g;
  }

private:
  struct NodeInfo {
    unsigned nest = 0;
  };

  unsigned annotate(const Formula& f) {
    if (auto it = info_.find(f.id()); it != info_.end()) return it->second.nest;
    unsigned n = 0;
    switch (f.op()) {
    case Op::Top:
    case Op::Bottom:
    case Op::Prop: break;
    case Op::Not: n = annotate(f.child()); break;
    case Op::Diamond:
    case Op::Box: n = annotate(f.child()) + (f.rel() == Rel::B ? 1 : 0); break;
    default: n = std::max(annotate(f.lhs()), annotate(f.rhs())); break;
    }
    info_[f.id()] = {n};
    return n;
  }

  const std::vector<Track>* representatives(StateId v, unsigned k, Direction dir) {
    std::uint64_t key = (std::uint64_t{v} << 33) | (std::uint64_t{k} << 1) | (dir == Direction::Backward ? 1 : 0);
    if (auto it = reps_.find(key); it != reps_.end()) return &it->second;
    if (rep_tracks_ >= opt_.rep_cache_tracks) return nullptr;
    std::vector<Track> all;
    Unraveller u(k_, v, k, dir);
    while (auto t = u.next()) {
      all.push_back(std::move(*t));
      if (rep_tracks_ + all.size() > opt_.rep_cache_tracks) return nullptr;
    }
    rep_tracks_ += all.size();
    return &reps_.emplace(key, std::move(all)).first->second;
  }

  // Calls fn on each representative until it returns true.
  template <class Fn>
  bool any_representative(StateId v, unsigned k, Direction dir, Fn&& fn) {
    if (const auto* list = representatives(v, k, dir)) {
      for (const Track& t : *list)
        if (fn(t.states())) return true;
      return false;
    }
    Unraveller u(k_, v, k, dir);
    while (auto t = u.next())
      if (fn(t->states())) return true;
    return false;
  }

  bool eval(unsigned k, const Formula& f, std::span<const StateId> rho) {
    switch (f.op()) {
    case Op::Top: return true;
    case Op::Bottom: return false;
    case Op::Prop: {
      StateSet h = k_.holds(f.name());
      return std::all_of(rho.begin(), rho.end(), [&](StateId s) { return h.contains(s); });
    }
    case Op::Not: return !eval(k, f.child(), rho);
    case Op::And: return eval(k, f.lhs(), rho) && eval(k, f.rhs(), rho);
    case Op::Or: return eval(k, f.lhs(), rho) || eval(k, f.rhs(), rho);
    case Op::Implies: return !eval(k, f.lhs(), rho) || eval(k, f.rhs(), rho);
    case Op::Iff: return eval(k, f.lhs(), rho) == eval(k, f.rhs(), rho);
    case Op::Diamond:
    case Op::Box: return eval_modal(k, f, rho);
    case Op::BigAnd: break;
    }
    throw Error("checker: unexpanded formula");
  }

  bool eval_modal(unsigned k, const Formula& f, std::span<const StateId> rho) {
    const unsigned nest = info_.at(f.id()).nest;
    const unsigned budget = opt_.tighten_budget ? nest : k;

    std::optional<detail::ElementKey> ekey;
    std::optional<detail::TrackKey> tkey;
    std::optional<detail::ElementKey> end_key;
    if (f.rel() == Rel::A || f.rel() == Rel::Abar) {
      StateId end = f.rel() == Rel::A ? rho.back() : rho.front();
      end_key = detail::ElementKey{f.id(), {end, {}, end}};
      if (auto it = endpoint_cache_.find(*end_key); it != endpoint_cache_.end()) return it->second;
    } else if (nest == 0) {
      ekey = detail::ElementKey{f.id(), descriptor_element(rho)};
      if (auto it = element_cache_.find(*ekey); it != element_cache_.end()) return it->second;
    } else {
      tkey = detail::TrackKey{f.id(), std::vector<StateId>(rho.begin(), rho.end())};
      if (const bool* v = track_cache_.find(*tkey)) return *v;
    }

    const bool want = f.op() == Op::Diamond;
    const Formula& g = f.child();
    auto hit = [&](unsigned kk, std::span<const StateId> t) { return eval(kk, g, t) == want; };
    bool found = false;
    std::vector<StateId> buf;

    switch (f.rel()) {
    case Rel::A:
      found = any_representative(rho.back(), budget, Direction::Forward,
                                 [&](std::span<const StateId> t) { return hit(budget, t); });
      break;
    case Rel::Abar:
      found = any_representative(rho.front(), budget, Direction::Backward,
                                 [&](std::span<const StateId> t) { return hit(budget, t); });
      break;
    case Rel::B: {
      const unsigned kk = budget == 0 ? 0 : budget - 1;
      for (std::size_t len = 2; len < rho.size() && !found; ++len) found = hit(kk, rho.first(len));
      break;
    }
    case Rel::Bbar:
      buf.assign(rho.begin(), rho.end());
      for (StateId v : k_.successors(rho.back())) {
        buf.push_back(v);
        found = hit(budget, buf);
        buf.pop_back();
        if (found) break;
        found = any_representative(v, budget, Direction::Forward, [&](std::span<const StateId> t) {
          buf.insert(buf.end(), t.begin(), t.end());
          bool r = hit(budget, buf);
          buf.resize(rho.size());
          return r;
        });
        if (found) break;
      }
      break;
    case Rel::Ebar:
      for (StateId v : k_.predecessors(rho.front())) {
        buf.assign(1, v);
        buf.insert(buf.end(), rho.begin(), rho.end());
        found = hit(budget, buf);
        if (found) break;
        found = any_representative(v, budget, Direction::Backward, [&](std::span<const StateId> t) {
          buf.assign(t.begin(), t.end());
          buf.insert(buf.end(), rho.begin(), rho.end());
          return hit(budget, buf);
        });
        if (found) break;
      }
      break;
    default: throw FragmentError(std::string("modality ") + rel_name(f.rel()) + " is outside the supported fragment");
    }

    bool result = want ? found : !found;
    if (end_key) endpoint_cache_.emplace(*end_key, result);
    else if (ekey) element_cache_.emplace(*ekey, result);
    else track_cache_.put(*tkey, result);
    return result;
  }

  const KripkeStructure& k_;
  CheckOptions opt_;
  std::vector<Formula> held_;
  std::unordered_map<const FormulaNode*, NodeInfo> info_;
  std::unordered_map<detail::ElementKey, bool, detail::ElementKeyHash> endpoint_cache_;
  std::unordered_map<detail::ElementKey, bool, detail::ElementKeyHash> element_cache_;
  detail::LruCache<detail::TrackKey, bool, detail::TrackKeyHash> track_cache_;
  std::unordered_map<std::uint64_t, std::vector<Track>> reps_;
  std::size_t rep_tracks_ = 0;
};

inline bool check(const KripkeStructure& k, unsigned budget, const Formula& psi, const Track& rho,
                  CheckOptions opt = {}) {
  if (opt.method == Method::Unravel) return RepresentativeChecker(k, opt).check(budget, psi, rho);
  SummaryChecker sc(k);
  Formula g = sc.prepare(psi);
  if (nest_b(g) > budget) throw FragmentError("budget below the B-nesting depth of the formula");
  return sc.holds(g, rho);
}

// K |= psi over the A, Ai, B, Bi, Ei fragment. With the Unravel method and opt.jobs > 1 representatives
// are checked in parallel batches; the counterexample is still the first failing one in enumeration order.
inline Verdict mod_check(const KripkeStructure& k, const Formula& psi, CheckOptions opt = {}) {
  if (opt.method == Method::Summary) {
    RepresentativeChecker front(k, opt);
    Formula g = front.prepare(psi);
    front.guard_tau(nest_b(g));
    SummaryChecker sc(k);
    auto ce = sc.counterexample(g);
    return {!ce.has_value(), std::move(ce)};
  }
  if (opt.jobs <= 1) return RepresentativeChecker(k, opt).mod_check(psi);

  RepresentativeChecker front(k, opt);
  Formula g = front.prepare(psi);
  const unsigned budget = nest_b(g);
  front.guard_tau(budget);
  std::vector<RepresentativeChecker> workers;
  for (unsigned i = 0; i < opt.jobs; ++i) workers.emplace_back(k, opt);

  Unraveller u(k, k.initial(), budget, Direction::Forward);
  const std::size_t batch = 64 * opt.jobs;
  for (;;) {
    std::vector<Track> tracks;
    while (tracks.size() < batch) {
      auto t = u.next();
      if (!t) break;
      tracks.push_back(std::move(*t));
    }
    if (tracks.empty()) return {true, std::nullopt};
    std::vector<char> ok(tracks.size(), 1);
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < opt.jobs; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = cursor++; i < tracks.size(); i = cursor++)
          ok[i] = workers[w].check(budget, g, tracks[i]) ? 1 : 0;
      });
    }
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < tracks.size(); ++i)
      if (!ok[i]) return {false, tracks[i]};
  }
}

} // namespace hsmc

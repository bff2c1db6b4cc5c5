#pragma once

#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hsmc/descriptor.hpp"
#include "hsmc/formula.hpp"
#include "hsmc/kripke.hpp"
#include "hsmc/unravel.hpp"

namespace hsmc {

// Descriptor elements of all tracks starting (Forward) or ending (Backward) at an anchor state,
// with parent links giving a shortest realizing track for each.
class WitnessTable {
public:
  WitnessTable(const KripkeStructure& k, StateId anchor, Direction dir) : anchor_(anchor), dir_(dir) {
    auto add = [&](const DescriptorElement& d, std::size_t parent, StateId step) {
      if (index_.count(d)) return;
      index_.emplace(d, elements_.size());
      elements_.push_back(d);
      parent_.push_back(parent);
      step_.push_back(step);
    };
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    if (dir == Direction::Forward) {
      for (StateId w : k.successors(anchor)) add({anchor, {}, w}, none, w);
    } else {
      for (StateId u : k.predecessors(anchor)) add({u, {}, anchor}, none, u);
    }
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      DescriptorElement d = elements_[i];
      if (dir == Direction::Forward) {
        for (StateId u : k.successors(d.final)) add({d.initial, d.internal.with(d.final), u}, i, u);
      } else {
        for (StateId x : k.predecessors(d.initial)) add({x, d.internal.with(d.initial), d.final}, i, x);
      }
    }
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      StateId key = dir == Direction::Forward ? elements_[i].final : elements_[i].initial;
      by_free_end_[key].push_back(i);
    }
  }

  StateId anchor() const { return anchor_; }
  Direction direction() const { return dir_; }
  const std::vector<DescriptorElement>& elements() const { return elements_; }
  bool contains(const DescriptorElement& d) const { return index_.count(d) != 0; }

  // Indices of elements whose non-anchored end is `v`.
  const std::vector<std::size_t>& with_free_end(StateId v) const {
    static const std::vector<std::size_t> empty;
    auto it = by_free_end_.find(v);
    return it == by_free_end_.end() ? empty : it->second;
  }

  // Shortest track realizing d.
  Track track_for(const DescriptorElement& d) const {
    std::size_t i = index_.at(d);
    std::vector<StateId> steps;
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    for (std::size_t j = i; j != none; j = parent_[j]) steps.push_back(step_[j]);
    steps.push_back(anchor_);
    if (dir_ == Direction::Forward) std::reverse(steps.begin(), steps.end());
    return Track(std::move(steps));
  }

private:
  StateId anchor_;
  Direction dir_;
  std::vector<DescriptorElement> elements_;
  std::vector<std::size_t> parent_;
  std::vector<StateId> step_;
  std::unordered_map<DescriptorElement, std::size_t> index_;
  std::unordered_map<StateId, std::vector<std::size_t>> by_free_end_;
};

inline WitnessTable witnessed_elements(const KripkeStructure& k, StateId v, Direction dir) {
  return WitnessTable(k, v, dir);
}

// Truth of a propositional formula on any track with element d: p holds iff it labels
// the first, the last and every internal state.
inline bool val(const KripkeStructure& k, const Formula& beta, const DescriptorElement& d) {
  switch (beta.op()) {
  case Op::Top: return true;
  case Op::Bottom: return false;
  case Op::Prop: return d.internal.with(d.initial).with(d.final).subset_of(k.holds(beta.name()));
  case Op::Not: return !val(k, beta.child(), d);
  case Op::And: return val(k, beta.lhs(), d) && val(k, beta.rhs(), d);
  case Op::Or: return val(k, beta.lhs(), d) || val(k, beta.rhs(), d);
  case Op::Implies: return !val(k, beta.lhs(), d) || val(k, beta.rhs(), d);
  case Op::Iff: return val(k, beta.lhs(), d) == val(k, beta.rhs(), d);
  default: throw FragmentError("val: formula is not propositional");
  }
}

// Decides whether some track with descriptor element d satisfies an existential formula, and
// produces such a track.
class ExistsChecker {
public:
  explicit ExistsChecker(const KripkeStructure& k) : k_(k) {}

  std::optional<Track> witness(const Formula& psi, const DescriptorElement& d) {
    auto key = std::make_pair(psi.id(), d);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::optional<Track> w = compute(psi, d);
    memo_.emplace(key, w);
    return w;
  }

  bool check(const Formula& psi, const DescriptorElement& d) { return witness(psi, d).has_value(); }

  const WitnessTable& table(StateId v, Direction dir) {
    auto& slot = dir == Direction::Forward ? forward_ : backward_;
    auto it = slot.find(v);
    if (it == slot.end()) it = slot.emplace(v, WitnessTable(k_, v, dir)).first;
    return it->second;
  }

private:
  Track some_track(const DescriptorElement& d) { return table(d.initial, Direction::Forward).track_for(d); }

  static Track join(const Track& a, const Track& b) {
    std::vector<StateId> s = a.vec();
    s.insert(s.end(), b.vec().begin(), b.vec().end());
    return Track(std::move(s));
  }

  std::optional<Track> compute(const Formula& psi, const DescriptorElement& d) {
    if (is_propositional(psi)) {
      if (val(k_, psi, d)) return some_track(d);
      return std::nullopt;
    }
    if (psi.op() == Op::Or) {
      if (auto w = witness(psi.lhs(), d)) return w;
      return witness(psi.rhs(), d);
    }
    if (psi.op() != Op::Diamond) throw FragmentError("formula is not in the existential A/Ai/B/E fragment");
    const Formula& phi = psi.child();
    switch (psi.rel()) {
    case Rel::A:
      for (const auto& e : table(d.final, Direction::Forward).elements())
        if (check(phi, e)) return some_track(d);
      return std::nullopt;
    case Rel::Abar:
      for (const auto& e : table(d.initial, Direction::Backward).elements())
        if (check(phi, e)) return some_track(d);
      return std::nullopt;
    case Rel::B: {
      const WitnessTable& from = table(d.initial, Direction::Forward);
      for (const auto& e : from.elements()) {
        StateSet head = e.internal.with(e.final);
        if (!head.subset_of(d.internal)) continue;
        // rho = rho' . fin
        if (head == d.internal && k_.has_edge(e.final, d.final)) {
          if (auto w = witness(phi, e)) {
            std::vector<StateId> s = w->vec();
            s.push_back(d.final);
            return Track(std::move(s));
          }
        }
        // rho = rho' . rho''
        for (StateId x : k_.successors(e.final)) {
          if (!d.internal.contains(x)) continue;
          for (std::size_t j : table(x, Direction::Forward).with_free_end(d.final)) {
            const DescriptorElement& tail = table(x, Direction::Forward).elements()[j];
            if (!(concat_descr(e, tail) == d)) continue;
            if (auto w = witness(phi, e)) return join(*w, table(x, Direction::Forward).track_for(tail));
            break;
          }
        }
      }
      return std::nullopt;
    }
    case Rel::E: {
      const WitnessTable& to = table(d.final, Direction::Backward);
      for (const auto& e : to.elements()) {
        StateSet tail = e.internal.with(e.initial);
        if (!tail.subset_of(d.internal)) continue;
        // rho = in . rho''
        if (tail == d.internal && k_.has_edge(d.initial, e.initial)) {
          if (auto w = witness(phi, e)) {
            std::vector<StateId> s{d.initial};
            s.insert(s.end(), w->vec().begin(), w->vec().end());
            return Track(std::move(s));
          }
        }
        // rho = rho' . rho''
        for (StateId y : k_.predecessors(e.initial)) {
          if (!d.internal.contains(y)) continue;
          for (std::size_t j : table(d.initial, Direction::Forward).with_free_end(y)) {
            const DescriptorElement& head = table(d.initial, Direction::Forward).elements()[j];
            if (!(concat_descr(head, e) == d)) continue;
            if (auto w = witness(phi, e)) return join(table(d.initial, Direction::Forward).track_for(head), *w);
            break;
          }
        }
      }
      return std::nullopt;
    }
    default: throw FragmentError("formula is not in the existential A/Ai/B/E fragment");
    }
  }

  struct KeyHash {
    std::size_t operator()(const std::pair<const FormulaNode*, DescriptorElement>& k) const noexcept {
      return std::hash<const void*>{}(k.first) * 31 + std::hash<DescriptorElement>{}(k.second);
    }
  };

  const KripkeStructure& k_;
  std::unordered_map<StateId, WitnessTable> forward_, backward_;
  std::unordered_map<std::pair<const FormulaNode*, DescriptorElement>, std::optional<Track>, KeyHash> memo_;
};

inline bool check_exists(const KripkeStructure& k, const Formula& psi, const DescriptorElement& d) {
  Formula g = desugar(psi);
  if (!in_exists_fragment(g)) throw FragmentError("formula is not in the existential A/Ai/B/E fragment");
  return ExistsChecker(k).check(g, d);
}

struct Counterexample {
  DescriptorElement element;
  Track track;
  Formula violated; // the existential dual satisfied by `track`
};

// First initial descriptor element (in discovery order) admitting a track that violates a universal
// formula, together with such a track.
inline std::optional<Counterexample> provide_counterex(const KripkeStructure& k, const Formula& psi) {
  Formula dual = to_exists_dual(psi);
  ExistsChecker ex(k);
  const WitnessTable& init = ex.table(k.initial(), Direction::Forward);
  for (const auto& d : init.elements()) {
    if (auto w = ex.witness(dual, d)) return Counterexample{d, std::move(*w), dual};
  }
  return std::nullopt;
}

} // namespace hsmc

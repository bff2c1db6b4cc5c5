#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hsmc/descriptor.hpp"
#include "hsmc/formula.hpp"
#include "hsmc/kripke.hpp"

namespace hsmc {

// Exact checker for the A, Ai, B, Bi, Ei fragment built on per-formula track summaries.
//
// A scope is a subformula evaluated on arbitrary tracks: the checked formula and every child of an
// A, Ai, Bi or Ei node. The summary of a track for a scope holds its descriptor element, one bit per
// B node of the scope (some proper prefix satisfies the child, or violates it for [B]), the child
// summary for each Bi node and the set of child summaries of all left extensions for each Ei node.
// Summaries are a function of the B_k-descriptor (k the nesting depth of the scope) and the summary
// of a track extended by one state is a function of the old summary and that state. Hence every
// summary class contains a representative, its shortest members are representatives, and truth of
// the scope formula is decided per summary.
class SummaryChecker {
public:
  using SummaryId = std::uint32_t;

  explicit SummaryChecker(const KripkeStructure& k) : k_(k) {}

  // Desugars and validates a formula, keeping it alive for the node-keyed tables.
  Formula prepare(const Formula& psi) {
    if (node_index_.count(psi.id())) return psi;
    Formula g = desugar(psi);
    if (modalities(g) & rel_bit(Rel::E)) throw FragmentError("the E modality is outside the supported fragment");
    held_.push_back(g);
    scope_of(g);
    return g;
  }

  bool holds(const Formula& psi, const Track& rho) {
    Formula g = prepare(psi);
    std::size_t s = scope_of(g);
    SummaryId x = init(s, rho.fst());
    for (std::size_t i = 1; i < rho.size(); ++i) {
      if (!k_.has_edge(rho.states()[i - 1], rho.states()[i])) throw ModelError("not a track of the structure");
      x = step(s, x, rho.states()[i]);
    }
    return value(s, g, x);
  }

  // First violating initial track in breadth-first order, which is a shortest one.
  std::optional<Track> counterexample(const Formula& psi) {
    Formula g = prepare(psi);
    std::size_t s = scope_of(g);
    std::unordered_map<SummaryId, std::pair<SummaryId, StateId>> parent;
    std::deque<SummaryId> queue;
    SummaryId root = init(s, k_.initial());
    parent.emplace(root, std::make_pair(root, k_.initial()));
    queue.push_back(root);
    while (!queue.empty()) {
      SummaryId x = queue.front();
      queue.pop_front();
      for (StateId u : k_.successors(last(s, x))) {
        SummaryId y = step(s, x, u);
        if (!parent.emplace(y, std::make_pair(x, u)).second) continue;
        if (!value(s, g, y)) {
          std::vector<StateId> t;
          for (SummaryId z = y; z != root; z = parent.at(z).first) t.push_back(parent.at(z).second);
          t.push_back(k_.initial());
          std::reverse(t.begin(), t.end());
          return Track(std::move(t));
        }
        queue.push_back(y);
      }
    }
    return std::nullopt;
  }

  // Number of summaries created so far over all scopes.
  std::size_t summary_count() const {
    std::size_t n = 0;
    for (const Scope& s : scopes_) n += s.states.size();
    return n;
  }

private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
      std::size_t h = v.size();
      for (std::uint32_t x : v) h = (h ^ x) * 0x100000001b3ULL;
      return h;
    }
  };

  // A summary is stored as [element code, Bi components, Ei set ids, B bits packed in 32-bit words].
  struct Scope {
    const FormulaNode* root = nullptr;
    std::vector<const FormulaNode*> b_nodes;
    std::vector<std::pair<const FormulaNode*, std::size_t>> bbar_nodes; // node, child scope
    std::vector<std::pair<const FormulaNode*, std::size_t>> ebar_nodes;
    std::unordered_map<const FormulaNode*, std::size_t> slot; // B: bit index; Bi/Ei: component index
    std::vector<std::vector<std::uint32_t>> states;
    std::unordered_map<std::vector<std::uint32_t>, SummaryId, KeyHash> index;
    std::unordered_map<std::uint64_t, SummaryId> next;
    std::vector<SummaryId> inits;
    bool explored = false;
    std::vector<SummaryId> all; // every reachable summary, pre-tracks included
  };

  // Element codes: 2v for the single-state prefix v, 2i+1 for descriptor element i.
  std::uint32_t element_code(const DescriptorElement& d) {
    auto it = element_index_.find(d);
    if (it != element_index_.end()) return it->second;
    auto code = static_cast<std::uint32_t>(2 * elements_.size() + 1);
    elements_.push_back(d);
    element_index_.emplace(d, code);
    return code;
  }

  static bool genuine(std::uint32_t code) { return code & 1; }
  const DescriptorElement& element(std::uint32_t code) const { return elements_[code / 2]; }

  StateId last(std::size_t s, SummaryId x) const {
    std::uint32_t code = scopes_[s].states[x][0];
    return genuine(code) ? element(code).final : static_cast<StateId>(code / 2);
  }

  std::size_t scope_of(const Formula& f) {
    if (auto it = scope_index_.find(f.id()); it != scope_index_.end()) return it->second;
    Scope sc;
    sc.root = f.id();
    collect(f, sc);
    std::size_t id = scopes_.size();
    scopes_.push_back(std::move(sc));
    scope_index_.emplace(f.id(), id);
    return id;
  }

  // Registers the B, Bi and Ei nodes reachable from f without crossing another scope boundary.
  void collect(const Formula& f, Scope& sc) {
    node_index_.emplace(f.id(), formulas_.size());
    formulas_.push_back(f);
    switch (f.op()) {
    case Op::Top:
    case Op::Bottom:
    case Op::Prop: return;
    case Op::Not: collect(f.child(), sc); return;
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff:
      collect(f.lhs(), sc);
      collect(f.rhs(), sc);
      return;
    case Op::Diamond:
    case Op::Box: break;
    case Op::BigAnd: throw Error("summary checker: unexpanded formula");
    }
    switch (f.rel()) {
    case Rel::B:
      if (!sc.slot.count(f.id())) {
        sc.slot.emplace(f.id(), sc.b_nodes.size());
        sc.b_nodes.push_back(f.id());
      }
      collect(f.child(), sc);
      return;
    case Rel::A:
    case Rel::Abar: scope_of(f.child()); return;
    case Rel::Bbar:
      if (!sc.slot.count(f.id())) {
        sc.slot.emplace(f.id(), sc.bbar_nodes.size());
        sc.bbar_nodes.emplace_back(f.id(), scope_of(f.child()));
      }
      return;
    case Rel::Ebar:
      if (!sc.slot.count(f.id())) {
        sc.slot.emplace(f.id(), sc.ebar_nodes.size());
        sc.ebar_nodes.emplace_back(f.id(), scope_of(f.child()));
      }
      return;
    default: throw FragmentError(std::string("modality ") + rel_name(f.rel()) + " is outside the supported fragment");
    }
  }

  SummaryId intern(std::size_t s, std::vector<std::uint32_t> key) {
    Scope& sc = scopes_[s];
    if (auto it = sc.index.find(key); it != sc.index.end()) return it->second;
    auto id = static_cast<SummaryId>(sc.states.size());
    sc.states.push_back(key);
    sc.index.emplace(std::move(key), id);
    return id;
  }

  std::uint32_t intern_set(std::vector<SummaryId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (auto it = set_index_.find(v); it != set_index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(sets_.size());
    sets_.push_back(v);
    set_index_.emplace(std::move(v), id);
    return id;
  }

  std::size_t bit_offset(std::size_t s) const {
    return 1 + scopes_[s].bbar_nodes.size() + scopes_[s].ebar_nodes.size();
  }

  SummaryId init(std::size_t s, StateId v) {
    Scope& sc0 = scopes_[s];
    if (sc0.inits.empty()) sc0.inits.assign(k_.num_states(), static_cast<SummaryId>(-1));
    if (sc0.inits[v] != static_cast<SummaryId>(-1)) return sc0.inits[v];
    std::vector<std::uint32_t> key{2 * v};
    for (std::size_t i = 0; i < scopes_[s].bbar_nodes.size(); ++i)
      key.push_back(init(scopes_[s].bbar_nodes[i].second, v));
    for (std::size_t i = 0; i < scopes_[s].ebar_nodes.size(); ++i) {
      std::size_t c = scopes_[s].ebar_nodes[i].second;
      explore(c);
      std::vector<SummaryId> ext;
      for (SummaryId y : scopes_[c].all)
        if (k_.has_edge(last(c, y), v)) ext.push_back(step(c, y, v));
      key.push_back(intern_set(std::move(ext)));
    }
    key.resize(bit_offset(s) + (scopes_[s].b_nodes.size() + 31) / 32, 0);
    SummaryId id = intern(s, std::move(key));
    scopes_[s].inits[v] = id;
    return id;
  }

  SummaryId step(std::size_t s, SummaryId x, StateId u) {
    std::uint64_t memo = (std::uint64_t{x} << 8) | u;
    if (auto it = scopes_[s].next.find(memo); it != scopes_[s].next.end()) return it->second;
    std::vector<std::uint32_t> old = scopes_[s].states[x];
    std::vector<std::uint32_t> key(old.size());
    const bool real = genuine(old[0]);
    if (real) {
      const DescriptorElement& d = element(old[0]);
      key[0] = element_code({d.initial, d.internal.with(d.final), u});
    } else {
      key[0] = element_code({static_cast<StateId>(old[0] / 2), {}, u});
    }
    std::size_t pos = 1;
    for (std::size_t i = 0; i < scopes_[s].bbar_nodes.size(); ++i, ++pos)
      key[pos] = step(scopes_[s].bbar_nodes[i].second, old[pos], u);
    for (std::size_t i = 0; i < scopes_[s].ebar_nodes.size(); ++i, ++pos) {
      std::size_t c = scopes_[s].ebar_nodes[i].second;
      std::vector<SummaryId> moved;
      for (SummaryId y : std::vector<SummaryId>(sets_[old[pos]])) moved.push_back(step(c, y, u));
      key[pos] = intern_set(std::move(moved));
    }
    for (std::size_t i = pos; i < old.size(); ++i) key[i] = old[i];
    if (real) {
      for (std::size_t i = 0; i < scopes_[s].b_nodes.size(); ++i) {
        const Formula& f = formulas_[node_index_.at(scopes_[s].b_nodes[i])];
        bool witness = value(s, f.child(), x) == (f.op() == Op::Diamond);
        if (witness) key[pos + i / 32] |= 1U << (i % 32);
      }
    }
    SummaryId y = intern(s, std::move(key));
    scopes_[s].next.emplace(memo, y);
    return y;
  }

  void explore(std::size_t s) {
    if (scopes_[s].explored) return;
    std::vector<SummaryId> order;
    std::vector<char> seen;
    auto visit = [&](SummaryId x) {
      if (x >= seen.size()) seen.resize(x + 1, 0);
      if (seen[x]) return;
      seen[x] = 1;
      order.push_back(x);
    };
    for (StateId v = 0; v < k_.num_states(); ++v) visit(init(s, v));
    for (std::size_t i = 0; i < order.size(); ++i) {
      SummaryId x = order[i];
      for (StateId u : k_.successors(last(s, x))) visit(step(s, x, u));
    }
    scopes_[s].all = std::move(order);
    scopes_[s].explored = true;
  }

  bool value(std::size_t s, const Formula& f, SummaryId x) {
    std::uint64_t key = (std::uint64_t{static_cast<std::uint32_t>(node_index_.at(f.id()))} << 32) | x;
    {
      const auto& memo = values_[s];
      if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    bool r = compute(s, f, x);
    values_[s].emplace(key, r);
    return r;
  }

  bool compute(std::size_t s, const Formula& f, SummaryId x) {
    const std::vector<std::uint32_t>& st = scopes_[s].states[x];
    if (!genuine(st[0])) throw Error("summary checker: formula evaluated on a single state");
    const DescriptorElement d = element(st[0]);
    switch (f.op()) {
    case Op::Top: return true;
    case Op::Bottom: return false;
    case Op::Prop: return d.internal.with(d.initial).with(d.final).subset_of(k_.holds(f.name()));
    case Op::Not: return !value(s, f.child(), x);
    case Op::And: return value(s, f.lhs(), x) && value(s, f.rhs(), x);
    case Op::Or: return value(s, f.lhs(), x) || value(s, f.rhs(), x);
    case Op::Implies: return !value(s, f.lhs(), x) || value(s, f.rhs(), x);
    case Op::Iff: return value(s, f.lhs(), x) == value(s, f.rhs(), x);
    case Op::Diamond:
    case Op::Box: break;
    case Op::BigAnd: throw Error("summary checker: unexpanded formula");
    }
    const bool want = f.op() == Op::Diamond;
    bool found = false;
    switch (f.rel()) {
    case Rel::B: {
      std::size_t i = scopes_[s].slot.at(f.id());
      found = (st[bit_offset(s) + i / 32] >> (i % 32)) & 1U;
      break;
    }
    case Rel::A: found = endpoint(f, d.final, true); break;
    case Rel::Abar: found = endpoint(f, d.initial, false); break;
    case Rel::Bbar: {
      std::size_t i = scopes_[s].slot.at(f.id());
      found = reaches_witness(f, scopes_[s].bbar_nodes[i].second, st[1 + i]);
      break;
    }
    case Rel::Ebar: {
      std::size_t i = scopes_[s].slot.at(f.id());
      std::size_t c = scopes_[s].ebar_nodes[i].second;
      for (SummaryId y : std::vector<SummaryId>(sets_[st[1 + scopes_[s].bbar_nodes.size() + i]]))
        if (value(c, f.child(), y) == want) {
          found = true;
          break;
        }
      break;
    }
    default: throw FragmentError(std::string("modality ") + rel_name(f.rel()) + " is outside the supported fragment");
    }
    return want ? found : !found;
  }

  // Some track starting (from_start) or ending at v where the child of f takes the witnessing value.
  bool endpoint(const Formula& f, StateId v, bool from_start) {
    std::uint64_t key = (std::uint64_t{static_cast<std::uint32_t>(node_index_.at(f.id()))} << 32) | v;
    if (auto it = endpoint_memo_.find(key); it != endpoint_memo_.end()) return it->second;
    std::size_t c = scope_of(f.child());
    explore(c);
    const bool want = f.op() == Op::Diamond;
    bool found = false;
    for (std::size_t n = 0; n < scopes_[c].all.size(); ++n) {
      SummaryId y = scopes_[c].all[n];
      std::uint32_t code = scopes_[c].states[y][0];
      if (!genuine(code)) continue;
      StateId end = from_start ? element(code).initial : element(code).final;
      if (end != v) continue;
      if (value(c, f.child(), y) == want) {
        found = true;
        break;
      }
    }
    endpoint_memo_.emplace(key, found);
    return found;
  }

  // Whether a summary reachable from y in at least one step gives the child of f the witnessing
  // value. Computed once per node by backward propagation over the explored child automaton.
  bool reaches_witness(const Formula& f, std::size_t c, SummaryId y) {
    auto it = reach_.find(f.id());
    if (it == reach_.end()) {
      explore(c);
      const bool want = f.op() == Op::Diamond;
      const Scope& sc = scopes_[c];
      std::vector<std::vector<SummaryId>> pred(sc.states.size());
      for (SummaryId z : sc.all)
        for (StateId u : k_.successors(last(c, z))) pred[step(c, z, u)].push_back(z);
      std::vector<char> mark(scopes_[c].states.size(), 0);
      std::vector<SummaryId> work;
      for (SummaryId z : scopes_[c].all) {
        if (!genuine(scopes_[c].states[z][0]) || value(c, f.child(), z) != want) continue;
        for (SummaryId p : pred[z])
          if (!mark[p]) {
            mark[p] = 1;
            work.push_back(p);
          }
      }
      while (!work.empty()) {
        SummaryId z = work.back();
        work.pop_back();
        for (SummaryId p : pred[z])
          if (!mark[p]) {
            mark[p] = 1;
            work.push_back(p);
          }
      }
      it = reach_.emplace(f.id(), std::move(mark)).first;
    }
    return y < it->second.size() && it->second[y];
  }

  const KripkeStructure& k_;
  std::vector<Formula> held_;
  std::vector<Formula> formulas_;
  std::unordered_map<const FormulaNode*, std::size_t> node_index_;
  std::vector<Scope> scopes_;
  std::unordered_map<const FormulaNode*, std::size_t> scope_index_;
  std::vector<DescriptorElement> elements_;
  std::unordered_map<DescriptorElement, std::uint32_t> element_index_;
  std::vector<std::vector<SummaryId>> sets_;
  std::unordered_map<std::vector<SummaryId>, std::uint32_t, KeyHash> set_index_;
  std::unordered_map<std::size_t, std::unordered_map<std::uint64_t, bool>> values_;
  std::unordered_map<std::uint64_t, bool> endpoint_memo_;
  std::unordered_map<const FormulaNode*, std::vector<char>> reach_;
};

} // namespace hsmc

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hsmc/error.hpp"
#include "hsmc/state_set.hpp"

namespace hsmc {

using PropId = std::uint32_t;

// Finite Kripke structure. States and propositions are numbered in declaration order,
// and successor lists are kept in that order, which is the DFS order used everywhere.
class KripkeStructure {
public:
  KripkeStructure(std::vector<std::string> states, std::vector<std::string> props,
                  std::vector<StateSet> holds, const std::vector<std::pair<StateId, StateId>>& edges,
                  StateId initial, bool left_total = true)
      : states_(std::move(states)), props_(std::move(props)), holds_(std::move(holds)), initial_(initial) {
    if (states_.empty()) throw ModelError("structure has no states");
    if (states_.size() > kMaxStates)
      throw ModelError("structure has " + std::to_string(states_.size()) + " states, at most " +
                       std::to_string(kMaxStates) + " are supported");
    if (holds_.size() != props_.size()) throw ModelError("one state set per proposition expected");
    if (initial_ >= states_.size()) throw ModelError("initial state out of range");
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (!state_index_.emplace(states_[i], static_cast<StateId>(i)).second)
        throw ModelError("duplicate state '" + states_[i] + "'");
    }
    for (std::size_t p = 0; p < props_.size(); ++p) {
      if (!prop_index_.emplace(props_[p], static_cast<PropId>(p)).second)
        throw ModelError("duplicate proposition '" + props_[p] + "'");
      if (!holds_[p].subset_of(StateSet::all(states_.size())))
        throw ModelError("proposition '" + props_[p] + "' labels an unknown state");
    }
    succ_set_.assign(states_.size(), StateSet{});
    pred_set_.assign(states_.size(), StateSet{});
    for (auto [u, v] : edges) {
      if (u >= states_.size() || v >= states_.size()) throw ModelError("edge endpoint out of range");
      succ_set_[u].insert(v);
      pred_set_[v].insert(u);
    }
    succ_.resize(states_.size());
    pred_.resize(states_.size());
    for (std::size_t s = 0; s < states_.size(); ++s) {
      if (left_total && succ_set_[s].empty()) throw ModelError("delta not left-total: state '" + states_[s] + "' has no successor");
      succ_[s].assign(succ_set_[s].begin(), succ_set_[s].end());
      pred_[s].assign(pred_set_[s].begin(), pred_set_[s].end());
    }
  }

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_props() const { return props_.size(); }
  StateId initial() const { return initial_; }

  const std::string& state_name(StateId s) const { return states_.at(s); }
  const std::string& prop_name(PropId p) const { return props_.at(p); }
  const std::vector<std::string>& state_names() const { return states_; }
  const std::vector<std::string>& prop_names() const { return props_; }

  std::optional<StateId> find_state(std::string_view name) const {
    auto it = state_index_.find(std::string(name));
    if (it == state_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<PropId> find_prop(std::string_view name) const {
    auto it = prop_index_.find(std::string(name));
    if (it == prop_index_.end()) return std::nullopt;
    return it->second;
  }

  // States where `p` holds.
  StateSet holds(PropId p) const { return holds_.at(p); }
  // States where the named proposition holds; empty for names outside AP.
  StateSet holds(std::string_view name) const {
    auto p = find_prop(name);
    return p ? holds_[*p] : StateSet{};
  }

  std::vector<PropId> label(StateId s) const {
    std::vector<PropId> out;
    for (PropId p = 0; p < props_.size(); ++p)
      if (holds_[p].contains(s)) out.push_back(p);
    return out;
  }

  const std::vector<StateId>& successors(StateId s) const { return succ_[s]; }
  const std::vector<StateId>& predecessors(StateId s) const { return pred_[s]; }
  StateSet successor_set(StateId s) const { return succ_set_[s]; }
  StateSet predecessor_set(StateId s) const { return pred_set_[s]; }
  bool has_edge(StateId u, StateId v) const { return succ_set_[u].contains(v); }

  std::vector<std::pair<StateId, StateId>> edges() const {
    std::vector<std::pair<StateId, StateId>> out;
    for (StateId u = 0; u < states_.size(); ++u)
      for (StateId v : succ_[u]) out.emplace_back(u, v);
    return out;
  }

  // Same structure with every edge reversed and the same initial state.
  // Reversed edges; states without predecessors become sinks.
  KripkeStructure transposed() const {
    std::vector<std::pair<StateId, StateId>> rev;
    for (auto [u, v] : edges()) rev.emplace_back(v, u);
    return KripkeStructure(states_, props_, holds_, rev, initial_, false);
  }

private:
  std::vector<std::string> states_;
  std::vector<std::string> props_;
  std::vector<StateSet> holds_;
  StateId initial_;
  std::unordered_map<std::string, StateId> state_index_;
  std::unordered_map<std::string, PropId> prop_index_;
  std::vector<StateSet> succ_set_, pred_set_;
  std::vector<std::vector<StateId>> succ_, pred_;
};

// Finite path of length at least 2.
class Track {
public:
  explicit Track(std::vector<StateId> states) : states_(std::move(states)) {
    if (states_.size() < 2) throw ModelError("a track has at least two states");
  }

  // Track whose consecutive states are connected in `k`.
  static Track checked(const KripkeStructure& k, std::vector<StateId> states) {
    Track t(std::move(states));
    for (StateId s : t.states_)
      if (s >= k.num_states()) throw ModelError("track mentions an unknown state");
    for (std::size_t i = 0; i + 1 < t.states_.size(); ++i)
      if (!k.has_edge(t.states_[i], t.states_[i + 1]))
        throw ModelError("no edge " + k.state_name(t.states_[i]) + "->" + k.state_name(t.states_[i + 1]));
    return t;
  }

  std::size_t size() const { return states_.size(); }
  StateId operator[](std::size_t i) const { return states_[i]; }
  StateId fst() const { return states_.front(); }
  StateId lst() const { return states_.back(); }
  std::span<const StateId> states() const { return states_; }
  const std::vector<StateId>& vec() const { return states_; }

  StateSet state_set() const {
    StateSet s;
    for (StateId v : states_) s.insert(v);
    return s;
  }
  // States strictly between fst and lst.
  StateSet internal_states() const {
    StateSet s;
    for (std::size_t i = 1; i + 1 < states_.size(); ++i) s.insert(states_[i]);
    return s;
  }

  // rho(i, j), both ends inclusive.
  Track sub(std::size_t i, std::size_t j) const {
    return Track(std::vector<StateId>(states_.begin() + static_cast<std::ptrdiff_t>(i),
                                      states_.begin() + static_cast<std::ptrdiff_t>(j) + 1));
  }

  // Proper prefixes, shortest first.
  std::vector<Track> prefixes() const {
    std::vector<Track> out;
    for (std::size_t i = 1; i + 2 <= states_.size(); ++i) out.push_back(sub(0, i));
    return out;
  }
  // Proper suffixes, longest first.
  std::vector<Track> suffixes() const {
    std::vector<Track> out;
    for (std::size_t i = 1; i + 2 <= states_.size(); ++i) out.push_back(sub(i, states_.size() - 1));
    return out;
  }

  bool operator==(const Track&) const = default;
  auto operator<=>(const Track&) const = default;

private:
  std::vector<StateId> states_;
};

// a . b; requires an edge lst(a) -> fst(b).
inline Track concat(const KripkeStructure& k, const Track& a, const Track& b) {
  if (!k.has_edge(a.lst(), b.fst())) throw ModelError("concatenation needs an edge between the tracks");
  std::vector<StateId> s = a.vec();
  s.insert(s.end(), b.vec().begin(), b.vec().end());
  return Track(std::move(s));
}

inline bool holds_on(const KripkeStructure& k, PropId p, const Track& t) {
  return t.state_set().subset_of(k.holds(p));
}

// Propositions true on every state of the track, in AP order.
inline std::vector<PropId> track_label(const KripkeStructure& k, const Track& t) {
  std::vector<PropId> out;
  StateSet s = t.state_set();
  for (PropId p = 0; p < k.num_props(); ++p)
    if (s.subset_of(k.holds(p))) out.push_back(p);
  return out;
}

inline std::string format_track(const KripkeStructure& k, std::span<const StateId> t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ' ';
    out += k.state_name(t[i]);
  }
  return out;
}
inline std::string format_track(const KripkeStructure& k, const Track& t) { return format_track(k, t.states()); }

// Whitespace or comma separated state names.
inline Track parse_track(const KripkeStructure& k, std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<StateId> states;
  std::string name;
  while (in >> name) {
    auto id = k.find_state(name);
    if (!id) throw ParseError("unknown state '" + name + "' in track");
    states.push_back(*id);
  }
  return Track::checked(k, std::move(states));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

} // namespace detail

// Reads the line-oriented model format:
//
//   states: v0 v1
//   init: v0
//   props: p q          (optional; otherwise AP is collected from the labels)
//   label v0: p
//   edges: v0->v1 v1->v0 v1->v1
inline KripkeStructure parse_kripke(std::string_view text) {
  std::vector<std::string> states;
  std::optional<std::vector<std::string>> declared_props;
  std::vector<std::string> props;
  std::unordered_map<std::string, std::size_t> state_line;
  struct LabelLine {
    std::size_t line;
    std::string state;
    std::vector<std::string> props;
  };
  struct EdgeRef {
    std::size_t line;
    std::string from, to;
  };
  std::vector<LabelLine> labels;
  std::vector<EdgeRef> edges;
  std::optional<std::pair<std::size_t, std::string>> init;
  bool saw_states = false;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected 'keyword: ...'", lineno);
    std::string_view head = detail::trim(line.substr(0, colon));
    std::vector<std::string> rest = detail::words(line.substr(colon + 1));

    if (head == "states") {
      if (saw_states) throw ParseError("duplicate 'states:' line", lineno);
      saw_states = true;
      for (auto& s : rest) {
        if (!detail::is_identifier(s)) throw ParseError("invalid state name '" + s + "'", lineno);
        if (state_line.count(s)) throw ParseError("duplicate state '" + s + "'", lineno);
        state_line.emplace(s, lineno);
        states.push_back(s);
      }
    } else if (head == "init") {
      if (init) throw ParseError("duplicate 'init:' line", lineno);
      if (rest.size() != 1) throw ParseError("'init:' takes exactly one state", lineno);
      init.emplace(lineno, rest[0]);
    } else if (head == "props") {
      if (declared_props) throw ParseError("duplicate 'props:' line", lineno);
      for (auto& p : rest) {
        if (!detail::is_identifier(p)) throw ParseError("invalid proposition name '" + p + "'", lineno);
        if (std::find(props.begin(), props.end(), p) != props.end())
          throw ParseError("duplicate proposition '" + p + "'", lineno);
        props.push_back(p);
      }
      declared_props = props;
    } else if (head.substr(0, 5) == "label") {
      auto w = detail::words(head);
      if (w.size() != 2 || w[0] != "label") throw ParseError("expected 'label <state>: ...'", lineno);
      for (auto& p : rest)
        if (!detail::is_identifier(p)) throw ParseError("invalid proposition name '" + p + "'", lineno);
      labels.push_back({lineno, w[1], rest});
    } else if (head == "edges") {
      for (auto& e : rest) {
        std::size_t arrow = e.find("->");
        if (arrow == std::string::npos || arrow == 0 || arrow + 2 >= e.size())
          throw ParseError("malformed edge '" + e + "', expected u->v", lineno);
        edges.push_back({lineno, e.substr(0, arrow), e.substr(arrow + 2)});
      }
    } else {
      throw ParseError("unknown keyword '" + std::string(head) + "'", lineno);
    }
  }

  if (!saw_states) throw ParseError("missing 'states:' line");
  if (!init) throw ParseError("missing 'init:' line");

  auto state_of = [&](const std::string& name, std::size_t line) -> StateId {
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end()) throw ParseError("unknown state '" + name + "'", line);
    return static_cast<StateId>(it - states.begin());
  };

  StateId initial = state_of(init->second, init->first);
  if (states.size() > kMaxStates)
    throw ParseError("at most " + std::to_string(kMaxStates) + " states are supported");

  std::vector<StateSet> holds(props.size());
  for (auto& l : labels) {
    StateId s = state_of(l.state, l.line);
    for (auto& p : l.props) {
      auto it = std::find(props.begin(), props.end(), p);
      if (it == props.end()) {
        if (declared_props) throw ParseError("unknown proposition '" + p + "'", l.line);
        props.push_back(p);
        holds.emplace_back();
        it = props.end() - 1;
      }
      holds[static_cast<std::size_t>(it - props.begin())].insert(s);
    }
  }

  std::vector<std::pair<StateId, StateId>> edge_ids;
  for (auto& e : edges) edge_ids.emplace_back(state_of(e.from, e.line), state_of(e.to, e.line));

  for (StateId s = 0; s < states.size(); ++s) {
    bool has = std::any_of(edge_ids.begin(), edge_ids.end(), [&](auto& e) { return e.first == s; });
    if (!has)
      throw ParseError("delta not left-total: state '" + states[s] + "' has no successor", state_line[states[s]]);
  }
  return KripkeStructure(states, props, holds, edge_ids, initial);
}

inline std::string serialize(const KripkeStructure& k) {
  std::string out = "states:";
  for (auto& s : k.state_names()) out += " " + s;
  out += "\ninit: " + k.state_name(k.initial()) + "\nprops:";
  for (auto& p : k.prop_names()) out += " " + p;
  out += "\n";
  for (StateId s = 0; s < k.num_states(); ++s) {
    auto l = k.label(s);
    if (l.empty()) continue;
    out += "label " + k.state_name(s) + ":";
    for (PropId p : l) out += " " + k.prop_name(p);
    out += "\n";
  }
  out += "edges:";
  for (auto [u, v] : k.edges()) out += " " + k.state_name(u) + "->" + k.state_name(v);
  out += "\n";
  return out;
}

} // namespace hsmc

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsmc/bounds.hpp"
#include "hsmc/error.hpp"
#include "hsmc/kripke.hpp"

namespace hsmc {

// (first state, internal states, last state) of a track.
struct DescriptorElement {
  StateId initial = 0;
  StateSet internal;
  StateId final = 0;

  // Type-2 elements have their final state among the internal ones.
  bool type2() const { return internal.contains(final); }

  bool operator==(const DescriptorElement&) const = default;
  auto operator<=>(const DescriptorElement&) const = default;
};

} // namespace hsmc

template <>
struct std::hash<hsmc::DescriptorElement> {
  std::size_t operator()(const hsmc::DescriptorElement& d) const noexcept {
    std::uint64_t h = d.internal.bits() * 0x9E3779B97F4A7C15ULL;
    h ^= (std::uint64_t{d.initial} << 32) ^ d.final;
    return std::hash<std::uint64_t>{}(h);
  }
};

namespace hsmc {

inline DescriptorElement descriptor_element(std::span<const StateId> t) {
  StateSet inner;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) inner.insert(t[i]);
  return {t.front(), inner, t.back()};
}
inline DescriptorElement descriptor_element(const Track& t) { return descriptor_element(t.states()); }

// concat((a,S1,b),(c,S2,e)) = (a, S1 + {b,c} + S2, e): element of a track glued from two tracks.
inline DescriptorElement concat_descr(const DescriptorElement& x, const DescriptorElement& y) {
  return {x.initial, x.internal.with(x.final).with(y.initial) | y.internal, y.final};
}

// d_i is the element of the prefix rho(0, i+1), for i = 0 .. |rho|-2.
using DescriptorSequence = std::vector<DescriptorElement>;

inline DescriptorSequence descriptor_sequence(std::span<const StateId> t) {
  DescriptorSequence seq;
  if (t.size() < 2) return seq;
  seq.reserve(t.size() - 1);
  StateSet inner;
  for (std::size_t i = 1; i < t.size(); ++i) {
    seq.push_back({t[0], inner, t[i]});
    inner.insert(t[i]);
  }
  return seq;
}
inline DescriptorSequence descriptor_sequence(const Track& t) { return descriptor_sequence(t.states()); }

// d' Rt d'' iff S' with v'fin added is contained in S''.
inline bool rt(const DescriptorElement& a, const DescriptorElement& b) {
  return a.internal.with(a.final).subset_of(b.internal);
}

inline std::string format_state_set(const KripkeStructure& k, StateSet s) {
  std::string out = "{";
  bool first = true;
  for (StateId v : s) {
    if (!first) out += ',';
    first = false;
    out += k.state_name(v);
  }
  return out + "}";
}

inline std::string format_element(const KripkeStructure& k, const DescriptorElement& d) {
  return "(" + k.state_name(d.initial) + "," + format_state_set(k, d.internal) + "," + k.state_name(d.final) + ")";
}

// Maximal run of Type-2 elements. All of them share the same internal set.
struct Cluster {
  std::vector<DescriptorElement> members; // in order of first occurrence
  std::size_t first = 0;                  // span in the sequence, inclusive
  std::size_t last = 0;
};

inline std::vector<Cluster> clusters(const DescriptorSequence& seq) {
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!seq[i].type2()) continue;
    if (out.empty() || out.back().last + 1 != i || out.back().members.front().internal != seq[i].internal)
      out.push_back({{}, i, i});
    Cluster& c = out.back();
    c.last = i;
    if (std::find(c.members.begin(), c.members.end(), seq[i]) == c.members.end()) c.members.push_back(seq[i]);
  }
  return out;
}

// Sequence on one line with cluster spans in brackets.
inline std::string format_sequence(const KripkeStructure& k, const DescriptorSequence& seq) {
  auto cs = clusters(seq);
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    bool opens = std::any_of(cs.begin(), cs.end(), [&](const Cluster& c) { return c.first == i; });
    bool closes = std::any_of(cs.begin(), cs.end(), [&](const Cluster& c) { return c.last == i; });
    if (opens) out += '[';
    out += format_element(k, seq[i]);
    if (closes) out += ']';
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-indistinguishability evaluated straight from its recursive definition.

class RecursiveIndistinguishability {
public:
  explicit RecursiveIndistinguishability(DescriptorSequence seq) : seq_(std::move(seq)) {
    // Prefix sets DElm(seq[0..i-1]) are nested, so they are equal iff their sizes are.
    std::set<DescriptorElement> seen;
    distinct_before_.reserve(seq_.size() + 1);
    for (const auto& d : seq_) {
      distinct_before_.push_back(seen.size());
      seen.insert(d);
    }
    distinct_before_.push_back(seen.size());
  }

  const DescriptorSequence& sequence() const { return seq_; }

  // Occurrences i < j are k-indistinguishable (k >= 1).
  bool operator()(std::size_t i, std::size_t j, unsigned k) {
    if (i >= j || j >= seq_.size() || !(seq_[i] == seq_[j])) return false;
    if (k <= 1) return distinct_before_[i] == distinct_before_[j];
    std::uint64_t key = (static_cast<std::uint64_t>(k) << 48) | (static_cast<std::uint64_t>(i) << 24) | j;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool ok = true;
    for (std::size_t l = i; l < j && ok; ++l) {
      bool found = false;
      for (std::size_t lp = 0; lp < i && !found; ++lp)
        found = seq_[lp] == seq_[l] && (*this)(lp, l, k - 1);
      ok = found;
    }
    memo_.emplace(key, ok);
    return ok;
  }

  // Previous occurrence of seq[j], or npos.
  std::size_t previous(std::size_t j) const {
    for (std::size_t i = j; i-- > 0;)
      if (seq_[i] == seq_[j]) return i;
    return npos;
  }

  // -1 for a first occurrence, else the largest t <= cap such that j is t-indistinguishable from its
  // previous occurrence (0 when it is not even 1-indistinguishable).
  int level(std::size_t j, unsigned cap) {
    std::size_t p = previous(j);
    if (p == npos) return -1;
    for (unsigned t = 1; t <= cap; ++t)
      if (!(*this)(p, j, t)) return static_cast<int>(t) - 1;
    return static_cast<int>(cap);
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  DescriptorSequence seq_;
  std::vector<std::size_t> distinct_before_;
  std::unordered_map<std::uint64_t, bool> memo_;
};

inline bool k_indistinguishable(const DescriptorSequence& seq, std::size_t i, std::size_t j, unsigned k) {
  RecursiveIndistinguishability r(seq);
  return r(i, j, k);
}

// ---------------------------------------------------------------------------
// Cluster scan. Arrays Q_{-2} .. Q_s partition the cluster; we store, for each element already seen,
// the index of the array holding it (unseen elements sit in Q_{-2}).

using Configuration = std::vector<std::size_t>; // |Q_{-2}|, |Q_{-1}|, ..., |Q_s|

class ClusterScanner {
public:
  explicit ClusterScanner(unsigned s) : s_(static_cast<int>(s)) {}

  // Feeds the next occurrence and returns its level: -1 for a first occurrence, otherwise t when it is
  // exactly t-indistinguishable from the previous occurrence (capped at s).
  int observe(const DescriptorElement& d) {
    auto it = std::find(seen_.begin(), seen_.end(), d);
    int level;
    std::size_t idx;
    if (it == seen_.end()) {
      level = -1;
      idx = seen_.size();
      seen_.push_back(d);
      slot_.push_back(-1);
    } else {
      idx = static_cast<std::size_t>(it - seen_.begin());
      level = std::min(slot_[idx] + 1, s_);
    }
    for (int& m : slot_) m = std::min(m, level);
    slot_[idx] = level;
    return level;
  }

  // Array index holding d: -2 if not seen yet.
  int slot_of(const DescriptorElement& d) const {
    auto it = std::find(seen_.begin(), seen_.end(), d);
    return it == seen_.end() ? -2 : slot_[static_cast<std::size_t>(it - seen_.begin())];
  }

  Configuration configuration(std::size_t cluster_size) const {
    Configuration c(static_cast<std::size_t>(s_) + 3, 0);
    c[0] = cluster_size - seen_.size();
    for (int m : slot_) ++c[static_cast<std::size_t>(m + 2)];
    return c;
  }

  unsigned s() const { return static_cast<unsigned>(s_); }

private:
  int s_;
  std::vector<DescriptorElement> seen_;
  std::vector<int> slot_;
};

struct ScanStep {
  std::size_t position = 0;
  int level = -1;
  std::vector<std::vector<DescriptorElement>> queues; // Q_{-2} .. Q_s, members in first-occurrence order
  Configuration config;
};

inline std::vector<ScanStep> scan(const DescriptorSequence& seq, const Cluster& c, unsigned s) {
  std::vector<ScanStep> out;
  ClusterScanner sc(s);
  for (std::size_t i = c.first; i <= c.last; ++i) {
    ScanStep st;
    st.position = i;
    st.level = sc.observe(seq[i]);
    st.queues.resize(s + 3);
    for (const auto& m : c.members) st.queues[static_cast<std::size_t>(sc.slot_of(m) + 2)].push_back(m);
    st.config = sc.configuration(c.members.size());
    out.push_back(std::move(st));
  }
  return out;
}

struct ScanCaseCounts {
  std::size_t a = 0, b = 0, c = 0, d = 0, e = 0;
};

// Scan driven by externally supplied levels, applying the five update cases verbatim.
// `level(i)` follows the convention of ClusterScanner::observe.
inline std::vector<ScanStep> scan_by_cases(const DescriptorSequence& seq, const Cluster& c, unsigned s,
                                           const std::function<int(std::size_t)>& level,
                                           ScanCaseCounts& counts) {
  const int top = static_cast<int>(s);
  std::vector<std::set<DescriptorElement>> q(s + 3);
  auto Q = [&](int m) -> std::set<DescriptorElement>& { return q[static_cast<std::size_t>(m + 2)]; };
  auto slot = [&](const DescriptorElement& d) {
    for (int m = -2; m <= top; ++m)
      if (Q(m).count(d)) return m;
    return -3;
  };
  auto collapse_from = [&](int t, const DescriptorElement& d) {
    std::set<DescriptorElement> merged{d};
    for (int m = t; m <= top; ++m) {
      merged.insert(Q(m).begin(), Q(m).end());
      Q(m).clear();
    }
    for (int m = -2; m < t; ++m) Q(m).erase(d);
    Q(t) = std::move(merged);
  };
  auto join_at = [&](int t, const DescriptorElement& d) {
    for (int m = t + 1; m <= top; ++m) Q(m).erase(d);
    Q(t).insert(d);
  };

  std::vector<ScanStep> out;
  for (std::size_t i = c.first; i <= c.last; ++i) {
    const DescriptorElement& d = seq[i];
    int lv = i == c.first ? -1 : level(i);
    if (i == c.first) {
      for (const auto& m : c.members)
        if (!(m == d)) Q(-2).insert(m);
      Q(-1).insert(d);
    } else if (lv == -1) {
      ++counts.a;
      collapse_from(-1, d);
    } else {
      int m = slot(d);
      if (lv == 0 && m == -1) {
        ++counts.b;
        collapse_from(0, d);
      } else if (lv == 0) {
        ++counts.c;
        join_at(0, d);
      } else if (m <= lv - 1) {
        ++counts.d;
        collapse_from(lv, d);
      } else {
        ++counts.e;
        join_at(lv, d);
      }
    }
    ScanStep st;
    st.position = i;
    st.level = lv;
    st.queues.resize(s + 3);
    st.config.assign(s + 3, 0);
    for (int m = -2; m <= top; ++m) {
      for (const auto& x : c.members)
        if (Q(m).count(x)) st.queues[static_cast<std::size_t>(m + 2)].push_back(x);
      st.config[static_cast<std::size_t>(m + 2)] = Q(m).size();
    }
    out.push_back(std::move(st));
  }
  return out;
}

// "210000" when every count is a digit, "2,1,0,0,0,0" otherwise.
inline std::string format_configuration(const Configuration& c) {
  bool digits = std::all_of(c.begin(), c.end(), [](std::size_t x) { return x < 10; });
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!digits && i) out += ',';
    out += std::to_string(c[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// B_k-descriptors, hash-consed so that isomorphic subtrees share one id.

class BkDescriptorFactory {
public:
  struct Node {
    DescriptorElement label;
    std::vector<std::uint32_t> children; // sorted, distinct

    bool operator==(const Node&) const = default;
  };

  explicit BkDescriptorFactory(std::size_t work_cap = 50'000'000) : work_cap_(work_cap) {}

  std::uint32_t intern(Node n) {
    auto it = index_.find(n);
    if (it != index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(n);
    index_.emplace(std::move(n), id);
    return id;
  }

  const Node& node(std::uint32_t id) const { return nodes_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }

  // Entry j (1 <= j < |rho|) holds the B_k-descriptor id of rho(0, j); entry 0 is unused.
  std::vector<std::uint32_t> prefix_descriptors(std::span<const StateId> t, unsigned k) {
    const std::size_t n = t.size();
    if (n < 2) throw ModelError("a track has at least two states");
    if (static_cast<double>(n) * static_cast<double>(n) * (k + 1) > static_cast<double>(work_cap_))
      throw ResourceError("descriptor of a track of length " + std::to_string(n) + " at depth " + std::to_string(k) +
                          " exceeds the work cap");
    DescriptorSequence seq = descriptor_sequence(t);
    std::vector<std::uint32_t> cur(n, 0);
    for (std::size_t j = 1; j < n; ++j) cur[j] = intern({seq[j - 1], {}});
    for (unsigned depth = 1; depth <= k; ++depth) {
      std::vector<std::uint32_t> next(n, 0);
      std::vector<std::uint32_t> acc;
      for (std::size_t j = 1; j < n; ++j) {
        next[j] = intern({seq[j - 1], acc});
        auto pos = std::lower_bound(acc.begin(), acc.end(), cur[j]);
        if (pos == acc.end() || *pos != cur[j]) acc.insert(pos, cur[j]);
      }
      cur = std::move(next);
    }
    return cur;
  }

  std::uint32_t build(std::span<const StateId> t, unsigned k) { return prefix_descriptors(t, k).back(); }
  std::uint32_t build(const Track& t, unsigned k) { return build(t.states(), k); }

  // Node count of the unshared tree.
  BigInt tree_size(std::uint32_t id) {
    if (auto it = size_memo_.find(id); it != size_memo_.end()) return it->second;
    BigInt s = 1;
    for (auto c : nodes_[id].children) s += tree_size(c);
    size_memo_.emplace(id, s);
    return s;
  }

  std::size_t depth(std::uint32_t id) const {
    std::size_t d = 0;
    for (auto c : nodes_[id].children) d = std::max(d, 1 + depth(c));
    return d;
  }

  // Canonical text: label followed by the sorted canonical texts of the children.
  std::string canonical(const KripkeStructure& k, std::uint32_t id) const {
    std::vector<std::string> kids;
    for (auto c : nodes_[id].children) kids.push_back(canonical(k, c));
    std::sort(kids.begin(), kids.end());
    std::string out = format_element(k, nodes_[id].label);
    if (!kids.empty()) {
      out += '[';
      for (std::size_t i = 0; i < kids.size(); ++i) out += (i ? "," : "") + kids[i];
      out += ']';
    }
    return out;
  }

  // Indented tree, children in canonical order.
  std::string render(const KripkeStructure& k, std::uint32_t id, std::size_t indent = 0) const {
    std::string out(indent * 2, ' ');
    out += format_element(k, nodes_[id].label) + "\n";
    std::vector<std::pair<std::string, std::uint32_t>> kids;
    for (auto c : nodes_[id].children) kids.emplace_back(canonical(k, c), c);
    std::sort(kids.begin(), kids.end());
    for (auto& [_, c] : kids) out += render(k, c, indent + 1);
    return out;
  }

private:
  struct NodeHash {
    std::size_t operator()(const Node& n) const noexcept {
      std::size_t h = std::hash<DescriptorElement>{}(n.label);
      for (auto c : n.children) h = h * 1000003U ^ c;
      return h;
    }
  };

  std::size_t work_cap_;
  std::vector<Node> nodes_;
  std::unordered_map<Node, std::uint32_t, NodeHash> index_;
  std::unordered_map<std::uint32_t, BigInt> size_memo_;
};

} // namespace hsmc

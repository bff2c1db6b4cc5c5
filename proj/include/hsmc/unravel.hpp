#pragma once

#include <optional>
#include <vector>

#include "hsmc/bounds.hpp"
#include "hsmc/descriptor.hpp"
#include "hsmc/kripke.hpp"

namespace hsmc {

enum class Direction { Forward, Backward };

// Longest track an unravelling may emit: 2 + |W|^2 for k = 0, tau(|W|, k) otherwise.
inline std::size_t unravel_length_bound(std::size_t w, unsigned k) {
  if (k == 0) return 2 + w * w;
  return saturate(tau(w, k));
}

namespace detail {

// True when the occurrence just fed is a repetition that the budget-k criterion rejects:
// any repeated element for k = 0, a k-indistinguishable repetition for k >= 1.
inline bool rejected(int level, unsigned k) { return level >= static_cast<int>(k); }

// Whether some occurrence in the descriptor sequence of `t` is rejected at budget k.
inline bool has_rejected_pair(std::span<const StateId> t, unsigned k) {
  ClusterScanner sc(k);
  bool in_cluster = false;
  StateSet inner;
  for (std::size_t i = 1; i < t.size(); ++i) {
    DescriptorElement d{t[0], inner, t[i]};
    inner.insert(t[i]);
    if (!d.type2()) {
      in_cluster = false;
      continue;
    }
    if (!in_cluster) {
      sc = ClusterScanner(k);
      in_cluster = true;
    }
    if (rejected(sc.observe(d), k)) return true;
  }
  return false;
}

} // namespace detail

// Lazy depth-first enumeration of representative tracks.
//
// Forward: tracks starting at `from`, children in successor order. A track whose newest descriptor
// occurrence repeats an earlier one indistinguishably at budget k is dropped with its whole subtree.
//
// Backward: tracks ending at `from`, grown leftwards over predecessors. Each candidate is re-scanned from
// its new first state; a rejected candidate is dropped with its subtree, since prepending a state keeps
// a rejected pair rejected.
class Unraveller {
public:
  Unraveller(const KripkeStructure& k, StateId from, unsigned budget, Direction dir, std::size_t length_cap = 0)
      : k_(k), budget_(budget), dir_(dir),
        cap_(length_cap ? length_cap : unravel_length_bound(k.num_states(), budget)) {
    frames_.push_back(Frame{from, 0, {}, ClusterScanner(budget), false});
    path_.push_back(from);
  }

  std::size_t length_cap() const { return cap_; }

  // Whether the stream emits `target`. Runs the same search restricted to the prefixes of target.
  static bool emits(const KripkeStructure& k, StateId from, unsigned budget, Direction dir, const Track& target,
                    std::size_t length_cap = 0) {
    Unraveller u(k, from, budget, dir, length_cap);
    u.guide_ = target.vec();
    if (dir == Direction::Backward) std::reverse(u.guide_.begin(), u.guide_.end());
    if (u.guide_.front() != from) return false;
    std::optional<Track> last;
    while (auto t = u.next()) last = std::move(t);
    return last && *last == target;
  }

  std::optional<Track> next() {
    return dir_ == Direction::Forward ? next_forward() : next_backward();
  }

  // All remaining tracks.
  std::vector<Track> drain() {
    std::vector<Track> out;
    while (auto t = next()) out.push_back(std::move(*t));
    return out;
  }

private:
  struct Frame {
    StateId state;
    std::size_t next_child;
    DescriptorElement element; // element of the path ending at this frame (unset for the root)
    ClusterScanner scanner;
    bool in_cluster;
  };

  std::optional<Track> next_forward() {
    while (!frames_.empty()) {
      Frame& top = frames_.back();
      const auto& succ = k_.successors(top.state);
      if (top.next_child >= succ.size() || path_.size() >= cap_) {
        frames_.pop_back();
        path_.pop_back();
        continue;
      }
      StateId v = succ[top.next_child++];
      if (off_guide(v)) continue;
      DescriptorElement d{path_.front(), {}, v};
      if (frames_.size() > 1) d.internal = top.element.internal.with(top.state);
      Frame child{v, 0, d, ClusterScanner(budget_), false};
      if (d.type2()) {
        if (top.in_cluster) child.scanner = top.scanner;
        child.in_cluster = true;
        if (detail::rejected(child.scanner.observe(d), budget_)) continue;
      }
      frames_.push_back(std::move(child));
      path_.push_back(v);
      return Track(path_);
    }
    return std::nullopt;
  }

  std::optional<Track> next_backward() {
    // path_ holds the track reversed: path_[0] is the fixed last state.
    while (!frames_.empty()) {
      Frame& top = frames_.back();
      const auto& pred = k_.predecessors(top.state);
      if (top.next_child >= pred.size() || path_.size() >= cap_) {
        frames_.pop_back();
        path_.pop_back();
        continue;
      }
      StateId u = pred[top.next_child++];
      if (off_guide(u)) continue;
      path_.push_back(u);
      std::vector<StateId> t(path_.rbegin(), path_.rend());
      if (detail::has_rejected_pair(t, budget_)) {
        path_.pop_back();
        continue;
      }
      frames_.push_back(Frame{u, 0, {}, ClusterScanner(budget_), false});
      return Track(std::move(t));
    }
    return std::nullopt;
  }

  bool off_guide(StateId next) const {
    return !guide_.empty() && (path_.size() >= guide_.size() || guide_[path_.size()] != next);
  }

  const KripkeStructure& k_;
  unsigned budget_;
  Direction dir_;
  std::size_t cap_;
  std::vector<Frame> frames_;
  std::vector<StateId> path_;
  std::vector<StateId> guide_; // in path_ order; empty when unrestricted
};

// Repeatedly removes the segment between the two occurrences of the earliest rejected repetition:
// for consecutive occurrences j < i of an element with i minimal, rho(0, j+1) is joined with
// rho(i+2, ...). The result has the B_k-descriptor of the input and no rejected repetition.
inline Track contract(const KripkeStructure& k, const Track& rho, unsigned budget) {
  std::vector<StateId> t = rho.vec();
  for (bool cut = true; cut;) {
    cut = false;
    RecursiveIndistinguishability r(descriptor_sequence(t));
    for (std::size_t i = 1; i < r.sequence().size(); ++i) {
      std::size_t j = r.previous(i);
      if (j == RecursiveIndistinguishability::npos || (budget > 0 && !r(j, i, budget))) continue;
      t.erase(t.begin() + static_cast<std::ptrdiff_t>(j) + 2, t.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      cut = true;
      break;
    }
  }
  return Track::checked(k, std::move(t));
}

inline std::vector<Track> unravel(const KripkeStructure& k, StateId from, unsigned budget, Direction dir) {
  return Unraveller(k, from, budget, dir).drain();
}

} // namespace hsmc

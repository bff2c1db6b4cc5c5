#pragma once

#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsmc/hsmc.hpp"

namespace hsmc::testing {

inline std::string model_path(const std::string& name) { return std::string(HSMC_MODELS_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline KripkeStructure load_model(const std::string& name) { return parse_kripke(read_text(model_path(name))); }
inline Formula load_formula(const std::string& name) { return parse_formula(read_text(model_path(name))); }

inline const char* kK2 = "states: v0 v1\ninit: v0\nprops: p q\nlabel v0: p\nlabel v1: q\n"
                         "edges: v0->v0 v0->v1 v1->v0 v1->v1\n";

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool coin(Rng& rng) { return pick(rng, 2) == 1; }

// States v0..v{n-1}, each edge present with probability 1/2 (one forced successor when none drawn),
// propositions p and q each labelling a state with probability 1/2.
inline KripkeStructure random_structure(Rng& rng, std::size_t max_states) {
  std::size_t n = 1 + pick(rng, max_states);
  std::string t = "states:";
  for (std::size_t i = 0; i < n; ++i) t += " v" + std::to_string(i);
  t += "\ninit: v0\nprops: p q\n";
  for (std::size_t i = 0; i < n; ++i) {
    t += "label v" + std::to_string(i) + ":";
    if (coin(rng)) t += " p";
    if (coin(rng)) t += " q";
    t += "\n";
  }
  t += "edges:";
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j)
      if (coin(rng)) {
        t += " v" + std::to_string(i) + "->v" + std::to_string(j);
        any = true;
      }
    if (!any) t += " v" + std::to_string(i) + "->v" + std::to_string(pick(rng, n));
  }
  return parse_kripke(t + "\n");
}

inline Formula random_literal(Rng& rng) {
  switch (pick(rng, 6)) {
  case 0: return Formula::prop("p");
  case 1: return Formula::prop("q");
  case 2: return Formula::neg(Formula::prop("p"));
  case 3: return Formula::neg(Formula::prop("q"));
  case 4: return Formula::top();
  default: return Formula::conj(Formula::prop("p"), Formula::prop("q"));
  }
}

// A formula with exactly `mods` modal operators drawn from `rels`, diamonds and boxes alike.
inline Formula random_formula(Rng& rng, unsigned mods, const std::vector<Rel>& rels) {
  if (mods == 0) return coin(rng) ? random_literal(rng) : Formula::disj(random_literal(rng), random_literal(rng));
  switch (pick(rng, 5)) {
  case 0: return Formula::neg(random_formula(rng, mods, rels));
  case 1:
  case 2: {
    unsigned left = static_cast<unsigned>(pick(rng, mods + 1));
    Formula a = random_formula(rng, left, rels);
    Formula b = random_formula(rng, mods - left, rels);
    return pick(rng, 2) ? Formula::conj(a, b) : Formula::disj(a, b);
  }
  default: {
    Rel r = rels[pick(rng, rels.size())];
    Formula body = random_formula(rng, mods - 1, rels);
    return coin(rng) ? Formula::diamond(r, body) : Formula::box(r, body);
  }
  }
}

inline const std::vector<Rel> kRepresentativeRels{Rel::A, Rel::Abar, Rel::B, Rel::Bbar, Rel::Ebar};

// Up to three modalities from A, Ai, B, Bi, Ei with B-nesting at most 2.
inline Formula random_representative_formula(Rng& rng) {
  for (;;) {
    Formula f = random_formula(rng, static_cast<unsigned>(pick(rng, 4)), kRepresentativeRels);
    if (nest_b(f) <= 2) return f;
  }
}

// Universal A, Ai, B, E formula: conjunctions of boxes over propositional leaves.
inline Formula random_forall_formula(Rng& rng, unsigned depth) {
  static const Rel rels[] = {Rel::A, Rel::Abar, Rel::B, Rel::E};
  if (depth == 0 || pick(rng, 4) == 0) return coin(rng) ? random_literal(rng) : Formula::neg(random_literal(rng));
  if (pick(rng, 3) == 0) return Formula::conj(random_forall_formula(rng, depth - 1), random_forall_formula(rng, depth - 1));
  return Formula::box(rels[pick(rng, 4)], random_forall_formula(rng, depth - 1));
}

// Random walk of the given length starting anywhere.
inline Track random_track(Rng& rng, const KripkeStructure& k, std::size_t length) {
  std::vector<StateId> t{static_cast<StateId>(pick(rng, k.num_states()))};
  while (t.size() < length) {
    const auto& succ = k.successors(t.back());
    t.push_back(succ[pick(rng, succ.size())]);
  }
  return Track(std::move(t));
}

// Prefix of a cluster scanned with s+3 arrays before its first (s+1)-indistinguishable consecutive pair.
inline Cluster within_scan_range(RecursiveIndistinguishability& r, Cluster c, unsigned s) {
  for (std::size_t i = c.first + 1; i <= c.last; ++i)
    if (r.level(i, s + 1) > static_cast<int>(s)) {
      c.last = i - 1;
      break;
    }
  return c;
}

// Calls fn on every track starting at v of length 2..max_len.
inline void for_each_track_from(const KripkeStructure& k, StateId v, std::size_t max_len,
                                const std::function<void(const Track&)>& fn) {
  std::vector<StateId> path{v};
  std::function<void()> rec = [&] {
    if (path.size() >= 2) fn(Track(path));
    if (path.size() >= max_len) return;
    for (StateId u : k.successors(path.back())) {
      path.push_back(u);
      rec();
      path.pop_back();
    }
  };
  rec();
}

inline KripkeStructure complete_structure(std::size_t n) {
  std::string t = "states:";
  for (std::size_t i = 0; i < n; ++i) t += " v" + std::to_string(i);
  t += "\ninit: v0\nedges:";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t += " v" + std::to_string(i) + "->v" + std::to_string(j);
  return parse_kripke(t + "\n");
}

} // namespace hsmc::testing

#include <gtest/gtest.h>

#include "support.hpp"

using namespace hsmc;
using namespace hsmc::testing;

namespace {

OracleConfig bounded(std::size_t depth) { return {OracleConfig::Mode::Bounded, depth}; }

// Relations between tracks of one structure, written out from their interval definitions.
bool related(Rel r, const Track& x, const Track& y) {
  auto is_prefix = [](const Track& a, const Track& b) {
    return a.size() < b.size() && std::equal(a.vec().begin(), a.vec().end(), b.vec().begin());
  };
  auto is_suffix = [](const Track& a, const Track& b) {
    return a.size() < b.size() && std::equal(a.vec().rbegin(), a.vec().rend(), b.vec().rbegin());
  };
  switch (r) {
  case Rel::A: return x.lst() == y.fst();
  case Rel::Abar: return x.fst() == y.lst();
  case Rel::B: return is_prefix(y, x);
  case Rel::Bbar: return is_prefix(x, y);
  case Rel::E: return is_suffix(y, x);
  case Rel::Ebar: return is_suffix(x, y);
  default: return false;
  }
}

} // namespace

TEST(Oracle, K2Goldens) {
  KripkeStructure k = parse_kripke(kK2);
  for (auto cfg : {OracleConfig{}, bounded(8)}) {
    EXPECT_TRUE(oracle_eval(k, parse_track(k, "v0 v1 v0 v1"), parse_formula("<Ai>p"), cfg));
    EXPECT_FALSE(oracle_eval(k, parse_track(k, "v1 v0 v1"), parse_formula("<Ai>p"), cfg));
    EXPECT_TRUE(oracle_eval(k, parse_track(k, "v0 v1"), Formula::top(), cfg));
  }
  EXPECT_TRUE(oracle_mod_check(k, Formula::top()).holds);
}

TEST(Oracle, Scheduler) {
  KripkeStructure k = load_model("scheduler.ks");
  for (auto cfg : {OracleConfig{}, bounded(14)}) {
    EXPECT_TRUE(oracle_mod_check(k, load_formula("scheduler_two_served.hs"), cfg).holds);
    EXPECT_FALSE(oracle_mod_check(k, load_formula("scheduler_p3_served.hs"), cfg).holds);
    EXPECT_FALSE(oracle_mod_check(k, load_formula("scheduler_all_served.hs"), cfg).holds);
  }
}

TEST(Oracle, ModalitiesMatchDefinitions) {
  // Each modality evaluated against a direct enumeration of related tracks up to a fixed length.
  Rng rng(109);
  for (int n = 0; n < 25; ++n) {
    KripkeStructure k = random_structure(rng, 3);
    std::vector<Track> tracks;
    for (StateId v = 0; v < k.num_states(); ++v)
      for_each_track_from(k, v, 6, [&](const Track& t) { tracks.push_back(t); });
    Formula leaf = random_literal(rng);
    for (Rel r : {Rel::A, Rel::Abar, Rel::B, Rel::Bbar, Rel::E, Rel::Ebar}) {
      Formula f = Formula::diamond(r, leaf);
      for (std::size_t i = 0; i < tracks.size(); i += 1 + tracks.size() / 40) {
        const Track& x = tracks[i];
        if (x.size() > 3) continue;
        bool direct = false;
        for (const Track& y : tracks) direct = direct || (related(r, x, y) && oracle_eval(k, y, leaf));
        // Every witness of length <= 6 is visible to the enumeration; longer ones only add truth.
        bool exact = oracle_eval(k, x, f);
        if (direct) EXPECT_TRUE(exact) << rel_name(r) << " " << format_track(k, x);
        if (r != Rel::Bbar && r != Rel::Ebar)
          EXPECT_EQ(oracle_eval(k, x, f, bounded(6)), direct) << rel_name(r) << " " << format_track(k, x);
      }
    }
  }
}

TEST(Oracle, BoundedConvergesToExact) {
  Rng rng(113);
  for (int n = 0; n < 60; ++n) {
    KripkeStructure k = random_structure(rng, 3);
    // One modality over propositional leaves: every needed witness is realized within 2 + |W|^2 states.
    Formula f = random_formula(rng, 1, {Rel::A, Rel::Abar, Rel::B, Rel::Bbar, Rel::E, Rel::Ebar});
    std::size_t depth = 2 + k.num_states() * k.num_states();
    for (int r = 0; r < 4; ++r) {
      Track t = random_track(rng, k, 2 + pick(rng, 4));
      EXPECT_EQ(oracle_eval(k, t, f, bounded(depth)), oracle_eval(k, t, f)) << to_string(f) << " " << format_track(k, t);
    }
  }
}

TEST(Oracle, Homogeneity) {
  Rng rng(127);
  for (int n = 0; n < 40; ++n) {
    KripkeStructure k = random_structure(rng, 4);
    Track t = random_track(rng, k, 3 + pick(rng, 6));
    if (!oracle_eval(k, t, Formula::prop("p"))) continue;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      for (std::size_t j = i + 1; j < t.size(); ++j) EXPECT_TRUE(oracle_eval(k, t.sub(i, j), Formula::prop("p")));
  }
}

TEST(Oracle, ModCheckCounterexampleIsInitialAndFalsifying) {
  Rng rng(131);
  for (int n = 0; n < 60; ++n) {
    KripkeStructure k = random_structure(rng, 4);
    Formula f = random_representative_formula(rng);
    OracleVerdict v = oracle_mod_check(k, f);
    EXPECT_EQ(v.holds, !v.counterexample.has_value());
    if (v.counterexample) {
      EXPECT_EQ(v.counterexample->fst(), k.initial());
      EXPECT_FALSE(oracle_eval(k, *v.counterexample, f));
    }
  }
}

#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace hsmc;
using namespace hsmc::testing;

namespace {

DescriptorElement el(const KripkeStructure& k, const std::string& init, std::vector<std::string> internal,
                     const std::string& fin) {
  DescriptorElement d;
  d.initial = *k.find_state(init);
  d.final = *k.find_state(fin);
  for (const auto& s : internal) d.internal.insert(*k.find_state(s));
  return d;
}

std::set<DescriptorElement> table_set(const WitnessTable& t) {
  return {t.elements().begin(), t.elements().end()};
}

} // namespace

TEST(Conp, Val) {
  KripkeStructure k2 = parse_kripke(kK2);
  EXPECT_FALSE(val(k2, parse_formula("p"), el(k2, "v0", {}, "v1")));
  EXPECT_TRUE(val(k2, Formula::top(), el(k2, "v0", {}, "v1")));
  EXPECT_TRUE(val(k2, parse_formula("p"), el(k2, "v0", {"v0"}, "v0")));
  EXPECT_FALSE(val(k2, parse_formula("p"), el(k2, "v0", {"v1"}, "v0")));
  KripkeStructure m = load_model("mutex.ks");
  EXPECT_TRUE(val(m, parse_formula("r0 & r1"), el(m, "w3", {}, "w4")));
  EXPECT_FALSE(val(m, parse_formula("e1"), el(m, "w3", {}, "w4")));
  EXPECT_THROW(val(m, parse_formula("<A>r0"), el(m, "w3", {}, "w4")), Error);
}

TEST(Conp, WitnessedElementsExamples) {
  KripkeStructure k2 = parse_kripke(kK2);
  auto all = table_set(witnessed_elements(k2, 0, Direction::Forward));
  EXPECT_EQ(all.size(), 8u);
  for (auto& d : all) EXPECT_EQ(d.initial, 0u);

  KripkeStructure chain = parse_kripke("states: a b\ninit: a\nedges: a->b b->b\n");
  EXPECT_EQ(table_set(witnessed_elements(chain, 0, Direction::Forward)),
            (std::set<DescriptorElement>{el(chain, "a", {}, "b"), el(chain, "a", {"b"}, "b")}));

  KripkeStructure m = load_model("mutex.ks");
  auto mx = table_set(witnessed_elements(m, 0, Direction::Forward));
  EXPECT_TRUE(mx.count(el(m, "w0", {}, "w1")));
  EXPECT_TRUE(mx.count(el(m, "w0", {"w1"}, "w3")));
}

TEST(Conp, WitnessedElementsMatchEnumeration) {
  Rng rng(89);
  for (int n = 0; n < 40; ++n) {
    KripkeStructure k = random_structure(rng, 3);
    std::size_t bound = 2 + k.num_states() * k.num_states();
    for (StateId v = 0; v < k.num_states(); ++v) {
      std::set<DescriptorElement> fwd, bwd;
      for_each_track_from(k, v, bound, [&](const Track& t) { fwd.insert(descriptor_element(t)); });
      KripkeStructure rev = k.transposed();
      for_each_track_from(rev, v, bound, [&](const Track& t) {
        std::vector<StateId> s(t.vec().rbegin(), t.vec().rend());
        bwd.insert(descriptor_element(Track(s)));
      });
      WitnessTable tf = witnessed_elements(k, v, Direction::Forward);
      WitnessTable tb = witnessed_elements(k, v, Direction::Backward);
      EXPECT_EQ(table_set(tf), fwd);
      EXPECT_EQ(table_set(tb), bwd);
      for (const auto* tab : {&tf, &tb})
        for (const auto& d : tab->elements()) {
          Track t = tab->track_for(d);
          EXPECT_EQ(descriptor_element(t), d);
          EXPECT_LE(t.size(), bound);
          EXPECT_NO_THROW(Track::checked(k, t.vec()));
        }
    }
  }
}

TEST(Conp, WitnessTracksAreShortOnLargerStructures) {
  Rng rng(97);
  for (int n = 0; n < 20; ++n) {
    KripkeStructure k = random_structure(rng, 4);
    WitnessTable t = witnessed_elements(k, 0, Direction::Forward);
    for (const auto& d : t.elements()) EXPECT_LE(t.track_for(d).size(), 2 + k.num_states() * k.num_states());
  }
  KripkeStructure m = load_model("mutex.ks");
  WitnessTable t = witnessed_elements(m, 0, Direction::Forward);
  for (const auto& d : t.elements()) EXPECT_LE(t.track_for(d).size(), 102u);
}

TEST(Conp, ConcatDescr) {
  KripkeStructure k = load_model("four_state.ks");
  EXPECT_EQ(concat_descr(el(k, "v0", {}, "v1"), el(k, "v2", {}, "v3")), el(k, "v0", {"v1", "v2"}, "v3"));
  KripkeStructure ab = parse_kripke("states: a b\ninit: a\nedges: a->b b->a\n");
  EXPECT_EQ(concat_descr(el(ab, "a", {}, "b"), el(ab, "b", {}, "a")), el(ab, "a", {"b"}, "a"));
}

TEST(Conp, ConcatDescrIsHomomorphic) {
  Rng rng(101);
  int joins = 0;
  for (int n = 0; n < 300; ++n) {
    KripkeStructure k = random_structure(rng, 4);
    Track a = random_track(rng, k, 2 + pick(rng, 5));
    Track b = random_track(rng, k, 2 + pick(rng, 5));
    if (!k.has_edge(a.lst(), b.fst())) continue;
    EXPECT_EQ(descriptor_element(concat(k, a, b)), concat_descr(descriptor_element(a), descriptor_element(b)));
    ++joins;
  }
  EXPECT_GT(joins, 50);
}

TEST(Conp, CheckExistsExamples) {
  KripkeStructure m = load_model("mutex.ks");
  DescriptorElement d = descriptor_element(parse_track(m, "w0 w1 w3 w8 w9"));
  EXPECT_TRUE(check_exists(m, parse_formula("<E>(e0 & e1)"), d));
  EXPECT_FALSE(check_exists(m, Formula::bottom(), d));
  KripkeStructure k2 = parse_kripke(kK2);
  EXPECT_TRUE(check_exists(k2, parse_formula("<A>q"), el(k2, "v0", {}, "v1")));
  EXPECT_FALSE(check_exists(k2, parse_formula("<B>q"), el(k2, "v0", {}, "v1")));
  EXPECT_THROW(check_exists(k2, parse_formula("<Bi>q"), el(k2, "v0", {}, "v1")), FragmentError);
}

TEST(Conp, CheckExistsMatchesOracleOnElements) {
  // For each element, the formula holds on some realizing track iff check_exists succeeds.
  Rng rng(103);
  for (int n = 0; n < 40; ++n) {
    KripkeStructure k = random_structure(rng, 3);
    Formula f = to_exists_dual(random_forall_formula(rng, 3));
    std::size_t bound = 2 + k.num_states() * k.num_states();
    std::set<DescriptorElement> sat, seen;
    for_each_track_from(k, 0, std::min<std::size_t>(bound, 9), [&](const Track& t) {
      DescriptorElement d = descriptor_element(t);
      seen.insert(d);
      if (!sat.count(d) && oracle_eval(k, t, f)) sat.insert(d);
    });
    ExistsChecker ex(k);
    for (const auto& d : seen) {
      auto w = ex.witness(f, d);
      if (sat.count(d)) EXPECT_TRUE(w.has_value()) << to_string(f);
      if (w) {
        EXPECT_EQ(descriptor_element(*w), d);
        EXPECT_TRUE(oracle_eval(k, *w, f)) << to_string(f) << " " << format_track(k, *w);
      }
    }
  }
}

TEST(Conp, ProvideCounterexample) {
  KripkeStructure m = load_model("mutex.ks");
  Formula f = load_formula("mutex_exclusion.hs");
  auto ce = provide_counterex(m, f);
  ASSERT_TRUE(ce);
  EXPECT_EQ(ce->track.fst(), m.initial());
  ASSERT_GE(ce->track.size(), 2u);
  EXPECT_EQ(m.state_name(ce->track[ce->track.size() - 2]), "w8");
  EXPECT_EQ(m.state_name(ce->track.lst()), "w9");
  EXPECT_EQ(ce->violated, parse_formula("<E>(e0 & e1)"));
  EXPECT_EQ(descriptor_element(ce->track), ce->element);
  EXPECT_TRUE(oracle_eval(m, ce->track, ce->violated));
  EXPECT_FALSE(oracle_eval(m, ce->track, f));

  EXPECT_FALSE(provide_counterex(m, parse_formula("[A]T")));
  EXPECT_THROW(provide_counterex(m, parse_formula("<A>T")), FragmentError);
}

TEST(Conp, AgreesWithOracle) {
  Rng rng(107);
  int violated = 0;
  for (int n = 0; n < 200; ++n) {
    KripkeStructure k = random_structure(rng, 4);
    Formula f = random_forall_formula(rng, 3);
    auto ce = provide_counterex(k, f);
    bool oracle = oracle_mod_check(k, f).holds;
    EXPECT_EQ(!ce.has_value(), oracle) << to_string(f) << "\n" << serialize(k);
    if (ce) {
      ++violated;
      EXPECT_EQ(ce->track.fst(), k.initial());
      EXPECT_EQ(descriptor_element(ce->track), ce->element);
      EXPECT_TRUE(oracle_eval(k, ce->track, to_exists_dual(f)));
      EXPECT_NO_THROW(Track::checked(k, ce->track.vec()));
    }
  }
  EXPECT_GT(violated, 20);
}

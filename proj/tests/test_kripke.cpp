#include <gtest/gtest.h>

#include "support.hpp"

using namespace hsmc;
using namespace hsmc::testing;

namespace {

std::vector<std::string> names(const KripkeStructure& k, const std::vector<PropId>& ps) {
  std::vector<std::string> out;
  for (PropId p : ps) out.push_back(k.prop_name(p));
  return out;
}

std::vector<std::string> names(const KripkeStructure& k, StateSet s) {
  std::vector<std::string> out;
  for (StateId v : s) out.push_back(k.state_name(v));
  return out;
}

} // namespace

TEST(Kripke, ParsesK2) {
  KripkeStructure k = parse_kripke(kK2);
  EXPECT_EQ(k.num_states(), 2u);
  EXPECT_EQ(k.state_name(k.initial()), "v0");
  EXPECT_EQ(names(k, k.label(0)), std::vector<std::string>{"p"});
  EXPECT_EQ(names(k, k.label(1)), std::vector<std::string>{"q"});
  EXPECT_EQ(k.edges().size(), 4u);
}

TEST(Kripke, SingleSelfLoop) {
  KripkeStructure k = parse_kripke("states: v\ninit: v\nlabel v: p\nedges: v->v\n");
  EXPECT_EQ(k.num_states(), 1u);
  EXPECT_TRUE(k.has_edge(0, 0));
  EXPECT_EQ(names(k, k.label(0)), std::vector<std::string>{"p"});
}

TEST(Kripke, RejectsMissingSuccessor) {
  try {
    parse_kripke("states: v0 v1\ninit: v0\nedges: v0->v1\n");
    FAIL() << "accepted a structure without a successor for v1";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("delta not left-total"), std::string::npos) << e.what();
  }
}

TEST(Kripke, RejectsMalformedInput) {
  EXPECT_THROW(parse_kripke("states: v0\ninit: v9\nedges: v0->v0\n"), Error);
  EXPECT_THROW(parse_kripke("states: v0\ninit: v0\nedges: v0->v1\n"), Error);
  EXPECT_THROW(parse_kripke("states: v0\ninit: v0\nlabel v1: p\nedges: v0->v0\n"), Error);
  EXPECT_THROW(parse_kripke("states: v0 v0\ninit: v0\nedges: v0->v0\n"), Error);
  EXPECT_THROW(parse_kripke("init: v0\nedges: v0->v0\n"), Error);
  EXPECT_THROW(parse_kripke("states: v0\ninit: v0\nedges: v0-v0\n"), Error);
}

TEST(Kripke, EdgeLinesAccumulate) {
  KripkeStructure k = parse_kripke("states: a b\ninit: a\nedges: a->b\nedges: b->a\n");
  EXPECT_TRUE(k.has_edge(0, 1));
  EXPECT_TRUE(k.has_edge(1, 0));
}

TEST(Kripke, SerializeRoundTrip) {
  for (const char* m : {"k2.ks", "four_state.ks", "scheduler.ks", "mutex.ks"}) {
    KripkeStructure k = load_model(m);
    KripkeStructure back = parse_kripke(serialize(k));
    EXPECT_EQ(serialize(back), serialize(k)) << m;
    EXPECT_EQ(back.edges(), k.edges()) << m;
  }
}

TEST(Kripke, TrackOpsOnK2) {
  KripkeStructure k = parse_kripke(kK2);
  Track t = parse_track(k, "v0 v1 v0");
  ASSERT_EQ(t.prefixes().size(), 1u);
  EXPECT_EQ(format_track(k, t.prefixes()[0]), "v0 v1");
  ASSERT_EQ(t.suffixes().size(), 1u);
  EXPECT_EQ(format_track(k, t.suffixes()[0]), "v1 v0");
  EXPECT_EQ(names(k, t.internal_states()), std::vector<std::string>{"v1"});

  Track two = parse_track(k, "v0 v1");
  EXPECT_TRUE(two.prefixes().empty());
  EXPECT_TRUE(two.suffixes().empty());
  EXPECT_TRUE(two.internal_states().empty());
}

TEST(Kripke, TrackOpsOnFourState) {
  KripkeStructure k = load_model("four_state.ks");
  Track t = parse_track(k, "v0 v0 v0 v1 v2");
  EXPECT_EQ(k.state_name(t.fst()), "v0");
  EXPECT_EQ(k.state_name(t.lst()), "v2");
  EXPECT_EQ(names(k, t.internal_states()), (std::vector<std::string>{"v0", "v1"}));
  EXPECT_EQ(t.size(), 5u);
}

TEST(Kripke, PrefixesAndSuffixesAreProper) {
  KripkeStructure k = parse_kripke(kK2);
  Rng rng(11);
  for (int n = 0; n < 50; ++n) {
    Track t = random_track(rng, k, 2 + pick(rng, 8));
    auto ps = t.prefixes();
    ASSERT_EQ(ps.size(), t.size() - 2);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      EXPECT_EQ(ps[i].size(), i + 2);
      EXPECT_TRUE(std::equal(ps[i].vec().begin(), ps[i].vec().end(), t.vec().begin()));
    }
    for (const Track& s : t.suffixes()) {
      EXPECT_GE(s.size(), 2u);
      EXPECT_LT(s.size(), t.size());
      EXPECT_TRUE(std::equal(s.vec().rbegin(), s.vec().rend(), t.vec().rbegin()));
    }
  }
}

TEST(Kripke, Concat) {
  KripkeStructure k = parse_kripke(kK2);
  EXPECT_EQ(format_track(k, concat(k, parse_track(k, "v0 v1"), parse_track(k, "v0 v1"))), "v0 v1 v0 v1");
  EXPECT_EQ(format_track(k, concat(k, parse_track(k, "v0 v0"), parse_track(k, "v0 v1"))), "v0 v0 v0 v1");

  KripkeStructure chain = parse_kripke("states: a b\ninit: a\nedges: a->b b->b\n");
  EXPECT_THROW(concat(chain, parse_track(chain, "a b"), parse_track(chain, "a b")), ModelError);
}

TEST(Kripke, ParseTrackValidatesEdges) {
  KripkeStructure chain = parse_kripke("states: a b\ninit: a\nedges: a->b b->b\n");
  EXPECT_THROW(parse_track(chain, "b a"), ModelError);
  EXPECT_THROW(parse_track(chain, "a"), ModelError);
  EXPECT_THROW(parse_track(chain, "a c"), Error);
  EXPECT_EQ(format_track(chain, parse_track(chain, "a b b")), "a b b");
}

TEST(Kripke, TrackLabelIsHomogeneous) {
  KripkeStructure k = parse_kripke(kK2);
  EXPECT_TRUE(track_label(k, parse_track(k, "v0 v1")).empty());
  EXPECT_EQ(names(k, track_label(k, parse_track(k, "v0 v0"))), std::vector<std::string>{"p"});

  KripkeStructure full = parse_kripke("states: a b\ninit: a\nprops: p q\nlabel a: p q\nlabel b: p q\nedges: a->b b->a\n");
  EXPECT_EQ(names(full, track_label(full, parse_track(full, "a b a"))), (std::vector<std::string>{"p", "q"}));
}

TEST(Kripke, TrackLabelMatchesEveryState) {
  Rng rng(5);
  for (int n = 0; n < 40; ++n) {
    KripkeStructure k = random_structure(rng, 4);
    Track t = random_track(rng, k, 2 + pick(rng, 6));
    for (PropId p = 0; p < k.num_props(); ++p) {
      bool all = true;
      for (StateId v : t.vec()) all = all && k.holds(p).contains(v);
      bool in = false;
      for (PropId q : track_label(k, t)) in = in || q == p;
      EXPECT_EQ(in, all);
    }
  }
}

TEST(Kripke, TransposedReversesEdges) {
  KripkeStructure k = load_model("four_state.ks");
  KripkeStructure r = k.transposed();
  for (StateId u = 0; u < k.num_states(); ++u)
    for (StateId v = 0; v < k.num_states(); ++v) EXPECT_EQ(k.has_edge(u, v), r.has_edge(v, u));
}

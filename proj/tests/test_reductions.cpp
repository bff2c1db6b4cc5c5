#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace hsmc;
using namespace hsmc::testing;

namespace {

std::set<std::string> label_names(const KripkeStructure& k, const std::string& state) {
  std::set<std::string> out;
  for (PropId p : k.label(*k.find_state(state))) out.insert(k.prop_name(p));
  return out;
}

} // namespace

TEST(Reductions, QbfStructureForThreeVariables) {
  Qbf q = parse_qbf("E x A y E z\nx | !y | z\n");
  Reduction r = qbf_to_kripke(q);
  EXPECT_EQ(r.model.num_states(), 15u);
  EXPECT_EQ(label_names(r.model, "w_x_F1"), (std::set<std::string>{"y", "z", "x_aux"}));
  EXPECT_EQ(label_names(r.model, "w_x_T1"), (std::set<std::string>{"x", "y", "z", "x_aux"}));
  EXPECT_EQ(label_names(r.model, "w0"), (std::set<std::string>{"x", "y", "z", "start"}));
  EXPECT_EQ(label_names(r.model, "sink"), (std::set<std::string>{"x", "y", "z"}));
}

TEST(Reductions, QbfWithoutVariables) {
  Qbf q = parse_qbf("\nT\n");
  Reduction r = qbf_to_kripke(q);
  ASSERT_EQ(r.model.num_states(), 3u);
  std::set<std::pair<std::string, std::string>> edges;
  for (auto [u, v] : r.model.edges()) edges.emplace(r.model.state_name(u), r.model.state_name(v));
  EXPECT_EQ(edges, (std::set<std::pair<std::string, std::string>>{{"w0", "w1"}, {"w1", "sink"}, {"sink", "sink"}}));
  EXPECT_TRUE(mod_check(r.model, r.formula).holds);
  EXPECT_FALSE(mod_check(qbf_to_kripke(parse_qbf("\nF\n")).model, qbf_to_kripke(parse_qbf("\nF\n")).formula).holds);
}

TEST(Reductions, SingleExistential) {
  Qbf q = parse_qbf("E x\nx\n");
  Reduction r = qbf_to_kripke(q);
  EXPECT_EQ(r.formula, parse_formula("start -> <Bi>(<A>x_aux & x)"));
  EXPECT_TRUE(eval_qbf(q));
  EXPECT_TRUE(mod_check(r.model, r.formula).holds);
  Qbf u = parse_qbf("A x\nx\n");
  EXPECT_FALSE(eval_qbf(u));
  EXPECT_FALSE(mod_check(qbf_to_kripke(u).model, qbf_to_kripke(u).formula).holds);
}

TEST(Reductions, QbfRoundTripsThroughText) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    Qbf q = random_qbf(1 + s % 4, s);
    Qbf back = parse_qbf(format_qbf(q));
    EXPECT_EQ(back.prefix, q.prefix);
    EXPECT_EQ(back.matrix, q.matrix);
  }
  EXPECT_THROW(parse_qbf("E x E x\nx\n"), Error);
  EXPECT_THROW(parse_qbf("E x\ny\n"), Error);
  EXPECT_THROW(parse_qbf("E x\n<A>x\n"), Error);
}

TEST(Reductions, QbfEquivalence) {
  int truths = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    Qbf q = random_qbf(s % 5, 1000 + s);
    Reduction r = qbf_to_kripke(q);
    EXPECT_EQ(r.model.num_states(), 4 * q.prefix.size() + 3);
    bool t = eval_qbf(q);
    EXPECT_EQ(mod_check(r.model, r.formula).holds, t) << format_qbf(q);
    truths += t;
  }
  EXPECT_GT(truths, 5);
  EXPECT_LT(truths, 55);
}

TEST(Reductions, SatStructureForFourVariables) {
  Cnf c = parse_dimacs("p cnf 4 2\n1 -2 0\n3 4 0\n");
  Reduction r = sat_to_kripke(c);
  EXPECT_EQ(r.model.num_states(), 9u);
  EXPECT_EQ(label_names(r.model, "w2_F"), (std::set<std::string>{"x1", "x3", "x4"}));
  EXPECT_EQ(label_names(r.model, "w0"), (std::set<std::string>{"x1", "x2", "x3", "x4"}));
  EXPECT_EQ(classify(r.formula), FragmentClass::Prop);
}

TEST(Reductions, UnsatisfiableCnf) {
  Cnf c = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n");
  Reduction r = sat_to_kripke(c);
  EXPECT_FALSE(brute_force_sat(c));
  EXPECT_TRUE(mod_check(r.model, r.formula).holds);
  EXPECT_FALSE(provide_counterex(r.model, r.formula));
}

TEST(Reductions, DimacsRoundTrip) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    Cnf c = random_cnf(1 + s % 6, 1 + s % 9, s);
    Cnf back = parse_dimacs(format_dimacs(c));
    EXPECT_EQ(back.vars, c.vars);
    EXPECT_EQ(back.clauses, c.clauses);
  }
  EXPECT_THROW(parse_dimacs("p cnf 2 1\n3 0\n"), Error);
  EXPECT_THROW(parse_dimacs("1 2 0\n"), Error);
}

TEST(Reductions, SatEquivalence) {
  int sat = 0;
  for (std::uint64_t s = 0; s < 80; ++s) {
    std::size_t n = 1 + s % 6;
    Cnf c = random_cnf(n, 1 + (s * 7) % (4 * n + 1), 2000 + s);
    Reduction r = sat_to_kripke(c);
    EXPECT_EQ(r.model.num_states(), 2 * n + 1);
    bool expected = brute_force_sat(c).has_value();
    auto ce = provide_counterex(r.model, r.formula);
    EXPECT_EQ(ce.has_value(), expected) << format_dimacs(c);
    EXPECT_EQ(mod_check(r.model, r.formula).holds, !expected);
    if (ce) EXPECT_TRUE(satisfies(c, decode_assignment(r.model, ce->track, n))) << format_track(r.model, ce->track);
    sat += expected;
  }
  EXPECT_GT(sat, 10);
  EXPECT_LT(sat, 75);
}

TEST(Reductions, GeneratorsAreDeterministic) {
  EXPECT_EQ(format_qbf(random_qbf(4, 7)), format_qbf(random_qbf(4, 7)));
  EXPECT_EQ(format_dimacs(random_cnf(5, 9, 7)), format_dimacs(random_cnf(5, 9, 7)));
}

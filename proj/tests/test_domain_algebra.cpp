#include <gtest/gtest.h>

#include <random>

#include "cdc/domain_algebra.hpp"
#include "support/oracles.hpp"

namespace cdc {
namespace {

DomainPath P(const char* text) { return DomainPath::parse(text); }
const DomainPath kTop = DomainPath::top();
const DomainPath kBot = DomainPath::bottom();

DomainUniverse make(std::initializer_list<const char*> paths, std::size_t h_max = DomainUniverse::default_h_max) {
  DomainUniverse u(h_max);
  for (auto p : paths) u.add(P(p));
  return u;
}

// The Experiment-1 lattice: Top > Science > {Physics, Biology} > Physics@Quantum.
DomainUniverse experiment1() { return make({"Science@Physics@Quantum", "Science@Biology"}); }

TEST(DomainPath, ParsesAndPrints) {
  EXPECT_EQ(P("Science@Physics").segments().size(), 2u);
  EXPECT_EQ(P("@Psychology@PHQ9"), P("Psychology@PHQ9"));
  EXPECT_TRUE(P("*").is_top());
  EXPECT_TRUE(P("⊥").is_bottom());
  EXPECT_EQ(P("a@b@c").to_string(), "a@b@c");
  EXPECT_THROW(P("a@@b"), Error);
  EXPECT_THROW(P("a-b"), Error);
}

TEST(Leq, WorkedAndTrivialExamples) {
  auto u = make({"Physics@Quantum", "Math"});
  EXPECT_TRUE(u.leq(P("Physics@Quantum"), P("Physics")));
  EXPECT_TRUE(u.leq(P("Physics"), kTop));
  EXPECT_TRUE(u.leq(P("Math"), P("Math")));
  EXPECT_TRUE(u.leq(kBot, P("Math")));
  EXPECT_THROW(u.leq(P("Chemistry"), P("Math")), Error);
}

TEST(Leq, MatchesBruteForceOrderOnSixNodeUniverse) {
  const std::vector<DomainPath> paths{P("Physics"), P("Physics@Quantum"), P("Physics@Classical"), P("Math"),
                                      P("Math@Algebra"), P("Math@Algebra@Groups")};
  DomainUniverse u;
  u.add_all(paths);
  ASSERT_EQ(u.size(), 6u);
  for (const auto& a : testing::with_bounds(paths))
    for (const auto& b : testing::with_bounds(paths)) EXPECT_EQ(u.leq(a, b), testing::prefix_leq(a, b)) << a.to_string() << " " << b.to_string();
  EXPECT_FALSE(u.leq(P("Physics"), P("Math")));
}

TEST(Meet, ObservationExamples) {
  DomainUniverse u;
  u.add_all(std::vector{P("Science@Physics"), P("Science@Math"), P("Science@Chemistry")});
  EXPECT_EQ(u.meet(P("Science@Physics"), P("Science")), P("Science@Physics"));
  EXPECT_EQ(u.meet(P("Science@Physics"), P("Science@Math")), kBot);
  EXPECT_EQ(u.meet(P("Science@Math"), kTop), P("Science@Math"));
  EXPECT_EQ(u.meet(kBot, P("Science")), kBot);
}

TEST(Meet, DeltaEdgesMakeFlatNamesComparable) {
  auto u = make({"Physics", "Math", "Science"});
  u.declare_delta(P("Physics"), P("Math"), P("Science"));
  EXPECT_EQ(u.meet(P("Physics"), P("Science")), P("Physics"));
  EXPECT_EQ(u.meet(P("Physics"), P("Math")), kBot);
}

TEST(BaseJoin, LongestCommonPrefix) {
  auto u = make({"Science@Physics", "Science@Math", "Arts@Music"});
  // Every common prefix of the two segment lists, enumerated: only "Science".
  EXPECT_EQ(u.base_join(P("Science@Physics"), P("Science@Math")), P("Science"));
  EXPECT_EQ(u.base_join(P("Science@Physics"), P("Science@Physics")), P("Science@Physics"));
  EXPECT_EQ(u.base_join(P("Science@Physics"), P("Arts@Music")), kTop);
  EXPECT_EQ(u.base_join(kBot, P("Arts")), P("Arts"));
  EXPECT_EQ(u.base_join(kTop, P("Arts")), kTop);
}

TEST(Join, DeclaredGeneralizationWins) {
  auto u = make({"Math", "Chemistry", "Science"});
  EXPECT_EQ(u.join(P("Math"), P("Chemistry")), kTop);
  u.declare_delta(P("Math"), P("Chemistry"), P("Science"));
  EXPECT_EQ(u.join(P("Math"), P("Chemistry")), P("Science"));
  EXPECT_EQ(u.join(P("Chemistry"), P("Math")), P("Science"));

  auto v = make({"Science@Physics@Quantum"});
  EXPECT_EQ(v.join(P("Science@Physics"), P("Science@Physics@Quantum")), P("Science@Physics"));
}

TEST(Implication, WorkedExamples) {
  // The universe named by the worked example.
  auto u = make({"Physics@Quantum"});
  EXPECT_EQ(u.implication(P("Physics@Quantum"), P("Physics")), kTop);
  EXPECT_EQ(u.implication(P("Physics"), P("Physics@Quantum")), P("Physics@Quantum"));
  for (const auto& d : u.elements()) EXPECT_EQ(u.implication(kBot, d), kTop);
}

TEST(Implication, SiblingsWidenTheEnumeratedJoin) {
  // With a sibling of Physics the set {d | d ⊓ Physics ⊑ Physics@Quantum}
  // contains Biology, so the join climbs to Science.
  auto u = experiment1();
  EXPECT_EQ(u.implication(P("Science@Physics"), P("Science@Physics@Quantum")), P("Science"));
}

TEST(Negation, BoundsAndComplementWitness) {
  auto u = make({"Science@Physics", "Science@Math"});
  EXPECT_EQ(u.negation(kTop), kBot);
  EXPECT_EQ(u.negation(kBot), kTop);
  // Brute force: {d | d ⊓ Science@Physics = ⊥} = {⊥, Science@Math}; its join is Science@Math.
  EXPECT_EQ(u.negation(P("Science@Physics")), P("Science@Math"));
  EXPECT_EQ(u.join(P("Science@Physics"), u.negation(P("Science@Physics"))), P("Science"));
  ASSERT_TRUE(u.complement_witness().has_value());
}

TEST(Height, Examples) {
  EXPECT_EQ(experiment1().height(), 3u);
  EXPECT_EQ(DomainUniverse{}.height(), 0u);
  EXPECT_EQ(make({"a@b@c"}).height(), 3u);
}

TEST(Height, CyclicDeltaIsRejected) {
  auto u = make({"A", "B", "C"});
  u.declare_delta(P("A"), P("B"), P("C"));
  u.declare_delta(P("C"), P("B"), P("A"));
  EXPECT_TRUE(u.has_cycle());
  try {
    (void)u.height();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cyclic_order);
  }
  EXPECT_FALSE(validate_axioms(u).at("A1").passed);
}

TEST(ValidateAxioms, ExperimentOneLattice) {
  const auto report = validate_axioms(experiment1());
  for (const char* id : {"A1", "A2", "A3", "A5", "A6", "A7", "A8"}) EXPECT_TRUE(report.at(id).passed) << id;
  // The lattice contains ⊥ < Quantum < Physics < Science with Biology beside
  // Physics: a non-distributive pentagon, so no implication can satisfy the
  // adjunction. The validator must surface that with a witness.
  const auto& a4 = report.at("A4");
  EXPECT_FALSE(a4.passed);
  ASSERT_FALSE(a4.witnesses.empty());
  const auto u = experiment1();
  const auto a = P("Science"), b = P("Science@Physics"), c = P("Science@Physics@Quantum");
  EXPECT_FALSE(u.leq(u.meet(a, b), c));
  EXPECT_TRUE(u.leq(a, u.implication(b, c)));
}

TEST(ValidateAxioms, AmbiguousDeltaFailsA7WithBothDeclarations) {
  auto u = make({"Math", "Chemistry", "Science", "Nature"});
  u.declare_delta(P("Math"), P("Chemistry"), P("Science"));
  u.declare_delta(P("Chemistry"), P("Math"), P("Nature"));
  const auto report = validate_axioms(u);
  const auto& a7 = report.at("A7");
  EXPECT_FALSE(a7.passed);
  bool both = false;
  for (const auto& w : a7.witnesses) both |= w.find("Science") != std::string::npos && w.find("Nature") != std::string::npos;
  EXPECT_TRUE(both);
}

TEST(ValidateAxioms, MissingPrefixFailsA6) {
  DomainUniverse u;
  u.add_exact(P("Science@Physics"));
  const auto report = validate_axioms(u);
  const auto& a6 = report.at("A6");
  EXPECT_FALSE(a6.passed);
  ASSERT_EQ(a6.witnesses.size(), 1u);
  EXPECT_NE(a6.witnesses[0].find("Science"), std::string::npos);
}

TEST(ValidateAxioms, HeightAboveCapFailsA5AndA8) {
  auto u = make({"a@b@c@d"}, 3);
  const auto r = validate_axioms(u);
  EXPECT_FALSE(r.at("A5").passed);
  EXPECT_FALSE(r.at("A8").passed);
}

TEST(ValidateAxioms, NonMinimalDeclarationFailsA7) {
  auto u = make({"Science@Physics", "Science@Biology"});
  u.add(P("Everything"));
  u.declare_delta(P("Science@Physics"), P("Science@Biology"), P("Everything"));
  EXPECT_TRUE(validate_axioms(u).at("A7").passed);  // Everything is a new, incomparable upper bound
  auto v = make({"Science@Physics", "Science@Biology"});
  v.add(P("Everything"));
  v.declare_delta(P("Science"), P("Science"), P("Everything"));
  v.declare_delta(P("Science@Physics"), P("Science@Biology"), P("Everything"));
  EXPECT_FALSE(validate_axioms(v).at("A7").passed);  // Science sits strictly between
}

// -- properties -------------------------------------------------------------

TEST(Properties, ObservationNonDistributivityWitness) {
  DomainUniverse u;
  u.add_all(std::vector{P("Science@Physics"), P("Science@Math"), P("Science@Chemistry")});
  u.declare_delta(P("Science@Math"), P("Science@Chemistry"), P("Science"));
  const auto physics = P("Science@Physics");
  const auto lhs = u.meet(physics, u.join(P("Science@Math"), P("Science@Chemistry")));
  const auto rhs = u.join(u.meet(physics, P("Science@Math")), u.meet(physics, P("Science@Chemistry")));
  EXPECT_EQ(lhs, physics);
  EXPECT_EQ(rhs, kBot);
}

TEST(Properties, PrefixDistributivityExhaustive) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 60; ++round) {
    DomainUniverse u;
    u.add_all(testing::random_prefix_universe(rng, 12));
    const auto elems = u.elements();
    for (const auto& d : elems)
      for (const auto& d1 : elems)
        for (const auto& d2 : elems) {
          if (u.meet(d1, d2).is_bottom()) continue;
          EXPECT_EQ(u.meet(d, u.base_join(d1, d2)), u.join(u.meet(d, d1), u.meet(d, d2)));
        }
  }
}

TEST(Properties, LatticeLawsAgainstBruteForceOracle) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 60; ++round) {
    const auto paths = testing::random_prefix_universe(rng, 10);
    DomainUniverse u;
    u.add_all(paths);
    const auto elems = testing::with_bounds(u.paths());
    for (const auto& a : elems) {
      EXPECT_EQ(u.meet(a, a), a);
      EXPECT_EQ(u.join(a, a), a);
      for (const auto& b : elems) {
        const auto m = u.meet(a, b);
        const auto j = u.join(a, b);
        EXPECT_EQ(m, *testing::brute_glb(elems, a, b));
        EXPECT_EQ(j, *testing::brute_lub(elems, a, b));
        EXPECT_EQ(m, u.meet(b, a));
        EXPECT_EQ(j, u.join(b, a));
        EXPECT_EQ(u.join(a, m), a);  // absorption
        EXPECT_EQ(u.meet(a, j), a);
        for (const auto& c : elems) {
          EXPECT_EQ(u.meet(u.meet(a, b), c), u.meet(a, u.meet(b, c)));
          EXPECT_EQ(u.join(u.join(a, b), c), u.join(a, u.join(b, c)));
        }
      }
    }
  }
}

TEST(Properties, AdjunctionHoldsOnDistributiveUniverses) {
  for (std::size_t depth = 1; depth <= 8; ++depth) {
    DomainUniverse chain;
    chain.add_all(testing::chain_universe(depth));
    EXPECT_TRUE(check_adjunction(chain).passed) << "chain depth " << depth;
  }
  auto two_roots = make({"Left", "Right"});
  EXPECT_TRUE(check_adjunction(two_roots).passed);
  auto square = make({"Science@Physics", "Science@Biology"});  // (2x2) with a top added
  EXPECT_TRUE(check_adjunction(square).passed);
}

TEST(Properties, AdjunctionFailsOnPentagon) {
  const auto check = check_adjunction(experiment1());
  EXPECT_FALSE(check.passed);
  EXPECT_EQ(check.cases, 6u * 6u * 6u);
}

TEST(Properties, BooleanComplementFails) {
  // Under a single root nothing is disjoint from the root, so its negation is
  // ⊥ and root ⊔ ¬root = root ≠ ⊤.
  std::mt19937_64 rng(3);
  for (int round = 0; round < 30; ++round) {
    std::vector<DomainPath> rooted;
    for (const auto& d : testing::random_prefix_universe(rng, 12)) {
      std::vector<std::string> segs{"Root"};
      segs.insert(segs.end(), d.segments().begin(), d.segments().end());
      rooted.emplace_back(segs);
    }
    DomainUniverse u;
    u.add_all(rooted);
    const auto w = u.complement_witness();
    ASSERT_TRUE(w.has_value());
    EXPECT_FALSE(u.join(*w, u.negation(*w)).is_top());
  }
  // Two bare roots form a Boolean square; no witness there.
  EXPECT_FALSE(make({"Left", "Right"}).complement_witness().has_value());
}

TEST(Properties, ImplicationIsMemoizedAndStableUnderCopy) {
  auto u = experiment1();
  const auto first = u.implication(P("Science@Biology"), P("Science@Physics"));
  auto copy = u;
  EXPECT_EQ(copy.implication(P("Science@Biology"), P("Science@Physics")), first);
  copy.add(P("Science@Chemistry"));
  EXPECT_NE(copy.version(), u.version());
  EXPECT_EQ(u.implication(P("Science@Biology"), P("Science@Physics")), first);
}

}  // namespace
}  // namespace cdc

#include <gtest/gtest.h>

#include <random>

#include "cdc/fiber_store.hpp"
#include "support/oracles.hpp"

namespace cdc {
namespace {

DomainPath P(const char* text) { return DomainPath::parse(text); }

Triple T(std::string s, std::string r, std::string t, const char* d, double conf = 1.0) {
  return {std::move(s), std::move(r), std::move(t), P(d), conf, Provenance::asserted()};
}

struct Store : ::testing::Test {
  DomainUniverse u;
  TypingTable typing;
  FiberStore store;
  void SetUp() override {
    u.add_all(std::vector{P("Science@Physics@Quantum"), P("Science@Biology"), P("Sciences")});
    typing.declare_tier(P("Logic"), DomainPath::top(), u);
    typing.declare_meta("requires", kTransitive, P("Logic"));
    extend(store, u, typing, T("Atom", "is_a", "Particle", "Science@Physics"));
    extend(store, u, typing, T("Wave", "contrasts_with", "Particle", "Science@Physics"));
    extend(store, u, typing, T("Atom", "is_a", "System", "Science@Physics@Quantum"));
    extend(store, u, typing, T("Atom", "is_a", "Thing", "Science"));
    extend(store, u, typing, T("Atom", "is_a", "Sign", "Sciences"));
  }
};

TEST_F(Store, PrefixQueryCollectsSubtree) {
  EXPECT_EQ(query(store, u, "Atom", "is_a", P("Science@Physics")).targets(), (std::vector<std::string>{"Particle", "System"}));
  EXPECT_EQ(query(store, u, "Atom", "is_a", P("Science")).targets(), (std::vector<std::string>{"Particle", "System", "Thing"}));
  // Segment prefix, not string prefix: "Sciences" is not under "Science".
  EXPECT_EQ(query(store, u, "Atom", "is_a", DomainPath::top()).targets().size(), 4u);
  EXPECT_TRUE(query(store, u, "Atom", "is_a", DomainPath::bottom()).hits.empty());
  EXPECT_TRUE(query(store, u, "Atom", "is_a", P("Science@Biology")).hits.empty());
}

TEST_F(Store, HitsKeepOriginDomain) {
  const auto res = query(store, u, "Atom", "is_a", P("Science@Physics"));
  ASSERT_EQ(res.hits.size(), 2u);
  EXPECT_EQ(res.hits[0].domain, P("Science@Physics"));
  EXPECT_EQ(res.hits[1].domain, P("Science@Physics@Quantum"));
}

TEST_F(Store, InsertIsIdempotentAndKeepsStrongestConfidence) {
  const auto before = store.size();
  EXPECT_FALSE(extend(store, u, typing, T("Atom", "is_a", "Particle", "Science@Physics")));
  EXPECT_EQ(store.size(), before);
  extend(store, u, typing, T("Cell", "part_of", "Tissue", "Science@Biology", 0.4));
  extend(store, u, typing, T("Cell", "part_of", "Tissue", "Science@Biology", 0.7));
  extend(store, u, typing, T("Cell", "part_of", "Tissue", "Science@Biology", 0.5));
  EXPECT_DOUBLE_EQ(store.fiber(P("Science@Biology")).find("Cell", "part_of", "Tissue")->confidence, 0.7);
  EXPECT_EQ(store.size(), before + 1);
}

TEST_F(Store, RejectsBadInput) {
  auto code = [&](Triple t) {
    try {
      extend(store, u, typing, std::move(t));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::parse_error;  // sentinel: nothing thrown
  };
  EXPECT_EQ(code(T("A", "is_a", "B", "Chemistry")), ErrorCode::unregistered_domain);
  EXPECT_EQ(code(T("A", "is_a", "B", "Logic")), ErrorCode::tier_violation);
  EXPECT_EQ(code(T("A b", "is_a", "B", "Science")), ErrorCode::invalid_argument);
  EXPECT_EQ(code(T("A", "is_a", "B", "Science", 1.5)), ErrorCode::invalid_argument);
  EXPECT_EQ(code(T("A", "is_a", "B", "Science", std::nan(""))), ErrorCode::invalid_argument);
  EXPECT_THROW(extend(store, u, typing, {"A", "is_a", "B", DomainPath::top(), 1.0, {}}), Error);
  EXPECT_THROW(query(store, u, "A", "is_a", P("Chemistry")), Error);
}

TEST_F(Store, StrictModeRejectsTransitiveCycleWithWitness) {
  extend(store, u, typing, T("A", "requires", "B", "Science"));
  extend(store, u, typing, T("B", "requires", "C", "Science"));
  try {
    extend(store, u, typing, T("C", "requires", "A", "Science"));
    FAIL() << "cycle accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cyclic_requires);
    EXPECT_NE(std::string(e.what()).find("C -> A -> B -> C"), std::string::npos) << e.what();
  }
  // Same edges in another fiber are unrelated.
  EXPECT_NO_THROW(extend(store, u, typing, T("C", "requires", "A", "Science@Biology")));
  // A self-loop is a cycle too.
  EXPECT_THROW(extend(store, u, typing, T("D", "requires", "D", "Science")), Error);
  // Non-transitive relations may loop.
  EXPECT_NO_THROW(extend(store, u, typing, T("X", "contrasts_with", "X", "Science")));
}

TEST_F(Store, LaxModeAcceptsCycle) {
  extend(store, u, typing, T("A", "requires", "B", "Science"));
  EXPECT_TRUE(extend(store, u, typing, T("B", "requires", "A", "Science"), FiberStore::CyclePolicy::lax));
}

TEST_F(Store, StatsCountOnlyMatchingFibers) {
  const auto res = query(store, u, "Atom", "is_a", P("Science@Physics"));
  EXPECT_EQ(res.stats.domains_matched, 2u);
  EXPECT_EQ(res.stats.fiber_size_bound, 3u);
  EXPECT_EQ(res.stats.candidates_examined, 2u);
  EXPECT_EQ(store.full_scan("Atom", "is_a", P("Science@Physics")).stats.candidates_examined, store.size());
}

TEST(StoreProperty, PrefixQueryAgreesWithFullScan) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 30; ++round) {
    const auto paths = testing::random_prefix_universe(rng, 12);
    DomainUniverse u;
    u.add_all(paths);
    FiberStore store;
    std::uniform_int_distribution<std::size_t> pick(0, u.paths().size() - 1);
    std::uniform_int_distribution<int> node(0, 5), rel(0, 1);
    const char* rels[] = {"r", "s"};
    for (int i = 0; i < 60; ++i) {
      const auto& d = u.paths()[pick(rng)];
      store.insert_unchecked({"c" + std::to_string(node(rng)), rels[rel(rng)], "c" + std::to_string(node(rng)), d, 1.0, {}});
    }
    for (const auto& d : testing::with_bounds(u.paths()))
      for (int c = 0; c < 6; ++c) {
        const auto fast = store.query_unchecked("c" + std::to_string(c), "r", d);
        const auto slow = store.full_scan("c" + std::to_string(c), "r", d);
        ASSERT_EQ(fast.hits.size(), slow.hits.size()) << d.to_string();
        for (std::size_t i = 0; i < fast.hits.size(); ++i) EXPECT_EQ(fast.hits[i].key(), slow.hits[i].key());
      }
  }
}

TEST(Provenance, Labels) {
  EXPECT_EQ(Provenance::hypothesis(2).to_string(), "bridged-hypothesis(2)");
  EXPECT_THROW(Provenance::hypothesis(0), Error);
  EXPECT_EQ(Provenance::inherited().to_string(), "inherited");
}

}  // namespace
}  // namespace cdc

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "cdc/experiments.hpp"
#include "support/fixtures.hpp"

namespace cdc {
namespace {

using experiments::Condition;

Eigen::VectorXd E(const Vec& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vec random_vec(std::mt19937_64& rng, std::size_t n, double range) {
  std::uniform_real_distribution<double> u(-range, range);
  Vec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// The largest singular value of h_r h_d^T, from a full SVD, against the
// product of norms the library reports.
TEST(RankOne, SpectralNormMatchesSvd) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> dim(2, 24);
  for (int i = 0; i < 200; ++i) {
    const auto n = dim(rng);
    const auto hr = random_vec(rng, n, 2.0), hd = random_vec(rng, n, 2.0);
    const Eigen::MatrixXd w = E(hr) * E(hd).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
    const double sigma = svd.singularValues()(0);
    EXPECT_NEAR(norm2(hr) * norm2(hd), sigma, 1e-9 * std::max(1.0, sigma));
    if (n > 1) {
      EXPECT_LT(svd.singularValues()(1), 1e-9 * std::max(1.0, sigma));
    }
  }
}

TEST(RankOne, ApplyMatchesDenseProduct) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto hr = random_vec(rng, 7, 1.0), hd = random_vec(rng, 7, 1.0), x = random_vec(rng, 7, 1.0);
    const Eigen::VectorXd expect = (E(hr) * E(hd).transpose()) * E(x);
    const auto got = apply_w(hr, hd, x);
    for (int k = 0; k < 7; ++k) EXPECT_NEAR(got[k], expect(k), 1e-12);
  }
  EXPECT_THROW(apply_w(Vec(3), Vec(4), Vec(4)), Error);
}

TEST(RankOne, ScaledOrthogonalHasExactRadius) {
  std::mt19937_64 rng(8);
  const auto rows = experiments::scaled_orthogonal(rng, 8, 1.5);
  Eigen::MatrixXd m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = rows[i][j];
  const Eigen::VectorXcd ev = m.eigenvalues();
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(ev(i)), 1.5, 1e-9);
}

struct Graph : ::testing::Test {
  KnowledgeBase kb = testing::load_fixture("experiment3.kb");
  void SetUp() override {
    ASSERT_TRUE(kb.ok());
    ASSERT_EQ(kb.store.size(), 40u);
  }
};

TEST_F(Graph, FixtureShape) {
  std::set<std::string> concepts, relations;
  for (const auto& t : experiments::all_triples(kb.store)) {
    concepts.insert(t.source);
    concepts.insert(t.target);
    relations.insert(t.relation);
  }
  EXPECT_EQ(concepts.size(), 20u);
  EXPECT_EQ(relations.size(), 3u);
  EXPECT_EQ(kb.store.fibers().size(), 2u);
}

TEST_F(Graph, InitIsDeterministicPerSeed) {
  EXPECT_EQ(init_embeddings(kb.store, 8, 3), init_embeddings(kb.store, 8, 3));
  EXPECT_NE(init_embeddings(kb.store, 8, 3), init_embeddings(kb.store, 8, 4));
  EXPECT_THROW(init_embeddings(kb.store, 1, 3), Error);
}

TEST_F(Graph, SpectralNormalizeEnforcesBudget) {
  auto e = init_embeddings(kb.store, 8, 1, {2.0, 2.0});
  EXPECT_FALSE(contraction_check(e).overall);
  spectral_normalize(e, 0.95);
  const auto rep = contraction_check(e);
  EXPECT_TRUE(rep.overall);
  EXPECT_LE(rep.max_product, 0.95 + 1e-12);
  EXPECT_EQ(rep.products.size(), 3u * 2u);
}

TEST_F(Graph, ConditionCConvergesOnEverySeed) {
  const auto rep = experiments::experiment3(kb.store, Condition::C, {.seeds = 100});
  EXPECT_EQ(rep.converged, 100u);
  EXPECT_LT(rep.max_final_delta, 1e-6);
  EXPECT_LT(rep.max_lambda, 1.0);
}

TEST_F(Graph, ConditionCRateStaysBelowOne) {
  const auto r = experiments::run_condition(kb.store, Condition::C, 0, {});
  ASSERT_TRUE(r.converged);
  EXPECT_LT(r.observed_rate, 1.0);
  EXPECT_LT(r.estimated_lambda, 1.0);
  for (const auto& [key, p] : r.contraction_products) EXPECT_LT(p, 1.0);
}

TEST_F(Graph, ConditionBIsMixed) {
  const auto rep = experiments::experiment3(kb.store, Condition::B, {.seeds = 100});
  EXPECT_GT(rep.converged, 0u);
  EXPECT_LT(rep.converged, 100u);
}

TEST_F(Graph, ConditionAFailsToConverge) {
  const auto rep = experiments::experiment3(kb.store, Condition::A, {.seeds = 5, .max_iter = 300});
  EXPECT_GE(rep.seeds - rep.converged, 1u);
  // Finite at the cap, but the deltas keep climbing.
  EXPECT_EQ(rep.growing, rep.seeds);
  EXPECT_EQ(rep.stalled, 0u);
}

TEST_F(Graph, DivergenceIsReportedAndRequireFiniteThrows) {
  ConvergenceReport diverged;
  for (std::uint64_t seed = 0; seed < 100 && !diverged.diverged; ++seed)
    diverged = experiments::run_condition(kb.store, Condition::B, seed, {});
  ASSERT_TRUE(diverged.diverged);
  EXPECT_FALSE(diverged.converged);
  try {
    require_finite(diverged);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite_value);
  }
}

TEST_F(Graph, MissingEmbeddingsAreNamed) {
  EmbeddingStore e;
  e.dim = 4;
  try {
    fixed_point_iterate(experiments::all_triples(kb.store), e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::missing_embeddings);
  }
}

TEST(Discovery, ProposesAboveThresholdOnly) {
  DomainUniverse u;
  u.add_all(std::vector{DomainPath::parse("A"), DomainPath::parse("B")});
  FiberStore store;
  store.insert_unchecked({"x", "r", "y", DomainPath::parse("A"), 1.0, {}});
  store.insert_unchecked({"p", "r", "q", DomainPath::parse("B"), 1.0, {}});
  auto e = init_embeddings(store, 6, 1);
  // Make x@A and p@B point the same way once conditioned on their domains.
  const auto& ha = e.h_d.at(DomainPath::parse("A"));
  const auto& hb = e.h_d.at(DomainPath::parse("B"));
  for (std::size_t i = 0; i < 6; ++i) e.h_c[{"p", DomainPath::parse("B")}][i] = e.h_c[{"x", DomainPath::parse("A")}][i] * ha[i] / hb[i];
  const auto props = discover_bridges(e, store, DomainPath::parse("A"), DomainPath::parse("B"), 0.999);
  ASSERT_FALSE(props.empty());
  EXPECT_EQ(props.front().source, "x");
  EXPECT_EQ(props.front().target, "p");
  EXPECT_NEAR(props.front().similarity, 1.0, 1e-12);
  for (const auto& p : props) EXPECT_GT(p.similarity, 0.999);
  BridgeRegistry reg;
  EXPECT_TRUE(reg.asserted().empty());
  accept_proposal(reg, store, u, props.front(), DomainPath::parse("A"), DomainPath::parse("B"));
  EXPECT_EQ(reg.asserted().size(), 1u);
}

}  // namespace
}  // namespace cdc

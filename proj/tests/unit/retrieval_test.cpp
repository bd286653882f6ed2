#include <algorithm>
#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "iclforge/modelgw/stub_backend.hpp"
#include "iclforge/retrieval.hpp"
#include "test_util.hpp"

using namespace iclforge;
using namespace iclforge::retrieval;

namespace {

EmbeddingVector Vec(std::vector<double> v, std::string enc = "e") { return {std::move(v), enc}; }

corpus::Repository Repo(std::vector<std::string> codes) {
  corpus::Repository r;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    r.demonstrations.push_back({"d" + std::to_string(i), codes[i], "0", Language::kC, false});
  }
  return r;
}

// Stub whose embeddings are fixed per text.
modelgw::Gateway FixedGateway(std::map<std::string, std::vector<double>> table) {
  modelgw::StubConfig cfg;
  cfg.embedding_overrides = std::move(table);
  return modelgw::Gateway(std::make_shared<modelgw::StubBackend>(cfg));
}

}  // namespace

TEST(Cosine, FortyFiveDegrees) {
  EXPECT_NEAR(CosineSimilarity(Vec({1, 0}), Vec({1, 1})), 0.70710678, 1e-8);
}

TEST(Cosine, ScaleInvariantAndSymmetric) {
  EXPECT_NEAR(CosineSimilarity(Vec({2, 0, 0}), Vec({0, 5, 0})), 0.0, 1e-12);
  EXPECT_NEAR(CosineSimilarity(Vec({3, 4}), Vec({6, 8})), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(CosineSimilarity(Vec({1, 2}), Vec({-3, 1})),
                   CosineSimilarity(Vec({-3, 1}), Vec({1, 2})));
}

TEST(Cosine, Mismatches) {
  EXPECT_ICL_ERROR(CosineSimilarity(Vec({1, 0}, "a"), Vec({1, 0}, "b")), ErrorCode::kEncoderMismatch);
  EXPECT_ICL_ERROR(CosineSimilarity(Vec({1, 0}), Vec({1, 0, 0})), ErrorCode::kDimensionMismatch);
  EXPECT_ICL_ERROR(CosineSimilarity(Vec({0, 0}), Vec({1, 0})), ErrorCode::kInvalidArgument);
}

TEST(Select, QueryPresentInRepoRanksFirst) {
  modelgw::Gateway gw(std::make_shared<modelgw::StubBackend>(modelgw::StubConfig{}));
  Embedder embedder(gw);
  auto repo = Repo({"int add(int a, int b) { return a + b; }", "while (p) p = p->next;",
                    "char *s = malloc(n); free(s);"});
  corpus::Query q{"q", repo.demonstrations[1].code, std::nullopt};
  auto sel = SelectTopN(q, repo, 1, embedder);
  ASSERT_EQ(sel.demonstrations.size(), 1u);
  EXPECT_EQ(sel.demonstrations[0].demo.id, "d1");
  EXPECT_NEAR(sel.demonstrations[0].similarity, 1.0, 1e-9);
}

TEST(Select, OrderAndTieBreakById) {
  auto gw = FixedGateway({{"q", {1, 0}}, {"a", {0, 1}}, {"b", {1, 1}}, {"c", {1, 0}}, {"d", {1, 1}}});
  Embedder embedder(gw);
  auto repo = Repo({"a", "b", "c", "d"});
  auto sel = SelectTopN({"q", "q", std::nullopt}, repo, 3, embedder);
  ASSERT_EQ(sel.demonstrations.size(), 3u);
  EXPECT_EQ(sel.demonstrations[0].demo.id, "d2");
  EXPECT_EQ(sel.demonstrations[1].demo.id, "d1");
  EXPECT_EQ(sel.demonstrations[2].demo.id, "d3");
}

TEST(Select, SaturatesAtRepositorySize) {
  auto gw = FixedGateway({{"q", {1, 0}}, {"a", {0, 1}}, {"b", {1, 1}}});
  Embedder embedder(gw);
  auto sel = SelectTopN({"q", "q", std::nullopt}, Repo({"a", "b"}), 7, embedder);
  EXPECT_EQ(sel.demonstrations.size(), 2u);
  EXPECT_EQ(sel.n, 7u);
}

TEST(Select, ZeroNAndEmptyRepository) {
  auto gw = FixedGateway({});
  Embedder embedder(gw);
  EXPECT_ICL_ERROR(SelectTopN({"q", "x", std::nullopt}, Repo({"a"}), 0, embedder),
                   ErrorCode::kInvalidArgument);
  EXPECT_ICL_ERROR(SelectTopN({"q", "x", std::nullopt}, Repo({}), 1, embedder),
                   ErrorCode::kEmptyRepository);
}

TEST(Cache, SecondLookupSkipsTheBackend) {
  auto gw = FixedGateway({});
  EmbeddingCache cache;
  Embedder embedder(gw, &cache);
  auto a = embedder.Embed("int x;");
  auto b = embedder.Embed("int x;");
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(gw.Counts().embed, 1u);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_FALSE(cache.Get("other-encoder", "int x;").has_value());
}

TEST(Pooling, MeanIsRenormalized) {
  auto p = PoolEmbeddings({Vec({1, 0}), Vec({0, 1})});
  EXPECT_NEAR(p.values[0], std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(p.values[1], std::sqrt(0.5), 1e-12);
}

TEST(Pooling, ConcatAgainstTiledCandidates) {
  auto p = PoolEmbeddings({Vec({1, 0}), Vec({0, 1})}, PoolMode::kConcat);
  ASSERT_EQ(p.dim(), 4u);
  auto t = Tile(Vec({1, 0}), 2);
  ASSERT_EQ(t.dim(), 4u);
  // <(1,0,0,1)/sqrt2, (1,0,1,0)/sqrt2> = 1/2.
  EXPECT_NEAR(CosineSimilarity(p, t), 0.5, 1e-12);
}

TEST(Pooling, Errors) {
  EXPECT_ICL_ERROR(PoolEmbeddings({}), ErrorCode::kEmptyQuerySet);
  EXPECT_ICL_ERROR(PoolEmbeddings({Vec({1, 0}, "a"), Vec({1, 0}, "b")}), ErrorCode::kEncoderMismatch);
  EXPECT_ICL_ERROR(PoolEmbeddings({Vec({1, 0}), Vec({1})}), ErrorCode::kDimensionMismatch);
}

TEST(Pooling, PooledSelectionUsesTheCentroid) {
  auto gw = FixedGateway({{"q1", {1, 0, 0}}, {"q2", {0, 1, 0}}, {"a", {1, 1, 0}}, {"b", {0, 0, 1}},
                          {"c", {1, 0, 0}}});
  Embedder embedder(gw);
  auto pooled = PooledQueryEmbedding({{"1", "q1", {}}, {"2", "q2", {}}}, embedder);
  auto sel = SelectTopNByVector(pooled, Repo({"a", "b", "c"}), 2, embedder);
  ASSERT_EQ(sel.demonstrations.size(), 2u);
  EXPECT_EQ(sel.demonstrations[0].demo.id, "d0");
  EXPECT_EQ(sel.demonstrations[1].demo.id, "d2");
}

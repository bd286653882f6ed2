#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "iclforge/modelgw/gateway.hpp"
#include "iclforge/modelgw/stub_backend.hpp"
#include "test_util.hpp"

using namespace iclforge;
using namespace iclforge::modelgw;

namespace {

Transcript Chat(const std::string& user) {
  return {{Role::kSystem, "You are a code reviewer."}, {Role::kUser, user}};
}

Gateway StubGateway(StubConfig cfg = {}) { return Gateway(std::make_shared<StubBackend>(cfg)); }

const std::vector<std::string> kLabels = {"0", "1"};

}  // namespace

TEST(Transcript, ValidationRules) {
  EXPECT_ICL_ERROR(ValidateTranscript({}), ErrorCode::kInvalidArgument);
  EXPECT_ICL_ERROR(ValidateTranscript({{Role::kUser, ""}}), ErrorCode::kInvalidArgument);
  EXPECT_ICL_ERROR(ValidateTranscript({{Role::kUser, "a"}, {Role::kSystem, "b"}}),
                   ErrorCode::kInvalidArgument);
  EXPECT_NO_THROW(ValidateTranscript(Chat("int x;")));
}

TEST(Gateway, ClassifyIsDeterministic) {
  auto a = StubGateway({.seed = 11});
  auto b = StubGateway({.seed = 11});
  auto ra = a.Classify(Chat("int f(){return 0;}"), kLabels);
  auto rb = b.Classify(Chat("int f(){return 0;}"), kLabels);
  EXPECT_EQ(ra.label, rb.label);
  EXPECT_EQ(ra.per_label, rb.per_label);
  double sum = 0.0;
  for (const auto& [_, p] : ra.per_label) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Gateway, EmptyTranscriptFailsWithoutCountingACall) {
  auto gw = StubGateway();
  EXPECT_ICL_ERROR(gw.Classify({}, kLabels), ErrorCode::kInvalidArgument);
  EXPECT_ICL_ERROR(gw.Complete({}, {}), ErrorCode::kInvalidArgument);
  EXPECT_EQ(gw.Counts().Total(), 0u);
}

TEST(Gateway, ScoresThatMissUnityAreRenormalized) {
  StubConfig cfg;
  cfg.classify_hook = [](const Transcript&, const std::vector<std::string>&) {
    return std::map<std::string, double>{{"0", 0.6}, {"1", 0.3}};
  };
  auto r = StubGateway(cfg).Classify(Chat("x"), kLabels);
  EXPECT_TRUE(r.renormalized);
  EXPECT_NEAR(r.raw_mass, 0.9, 1e-12);
  EXPECT_NEAR(r.per_label.at("0"), 0.6 / 0.9, 1e-12);
  EXPECT_NEAR(r.per_label.at("1"), 0.3 / 0.9, 1e-12);
  EXPECT_EQ(r.label, "0");
  EXPECT_NEAR(r.confidence, 2.0 / 3.0, 1e-12);
}

TEST(Gateway, SingleLabelRejected) {
  auto gw = StubGateway();
  EXPECT_ICL_ERROR(gw.Classify(Chat("x"), {"1"}), ErrorCode::kInvalidArgument);
}

TEST(Gateway, MissingLabelScoreIsUnscorable) {
  StubConfig cfg;
  cfg.classify_hook = [](const Transcript&, const std::vector<std::string>&) {
    return std::map<std::string, double>{{"0", 1.0}};
  };
  auto gw = StubGateway(cfg);
  EXPECT_ICL_ERROR(gw.Classify(Chat("x"), kLabels), ErrorCode::kLabelsUnscorable);
}

TEST(Gateway, PlantedRuleShiftsTheLabel) {
  StubConfig cfg;
  cfg.rules = {{"dbg_probe", "1", 50.0}};
  auto gw = StubGateway(cfg);
  EXPECT_EQ(gw.Classify(Chat("int dbg_probe = 1;"), kLabels).label, "1");
}

TEST(Substitutes, CappedAtTopI) {
  auto gw = StubGateway();
  auto out = gw.ProposeSubstitutes("int <mask> = 0;", 80, Language::kC);
  EXPECT_LE(out.size(), 80u);
  ASSERT_FALSE(out.empty());
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].rank, i + 1);
  auto few = gw.ProposeSubstitutes("int <mask> = 0;", 5, Language::kC);
  EXPECT_LE(few.size(), 5u);
}

TEST(Substitutes, KnownTokensKeepModelOrder) {
  StubConfig cfg;
  cfg.proposals = {"tmp", "val", "cnt"};
  auto out = StubGateway(cfg).ProposeSubstitutes("x = <mask> + 1", 80, Language::kPython);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].token, "tmp");
  EXPECT_EQ(out[1].token, "val");
  EXPECT_EQ(out[2].token, "cnt");
}

TEST(Substitutes, ReservedWordsAndNonIdentifiersAreDropped) {
  StubConfig cfg;
  cfg.proposals = {"for", "tmp", "3x", "tmp", "while", "idx"};
  auto out = StubGateway(cfg).ProposeSubstitutes("int <mask>;", 80, Language::kC);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].token, "tmp");
  EXPECT_EQ(out[1].token, "idx");
  EXPECT_EQ(out[1].rank, 2u);
}

TEST(Substitutes, SubwordPiecesAreJoined) {
  StubConfig cfg;
  cfg.infill_hook = [](std::string_view, std::string_view, std::size_t) {
    return std::vector<RawProposal>{{{"\xC4\xA0" "cou", "nt"}, 0.2}, {{"\xE2\x96\x81" "val", "##ue"}, 0.9}};
  };
  auto out = StubGateway(cfg).ProposeSubstitutes("int <mask>;", 10, Language::kC);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].token, "value");
  EXPECT_EQ(out[1].token, "count");
}

TEST(Substitutes, MaskCountIsChecked) {
  auto gw = StubGateway();
  EXPECT_ICL_ERROR(gw.ProposeSubstitutes("int x;", 10, Language::kC), ErrorCode::kNoMask);
  EXPECT_ICL_ERROR(gw.ProposeSubstitutes("<mask> = <mask>;", 10, Language::kC),
                   ErrorCode::kMultipleMasks);
}

TEST(Substitutes, CustomMaskToken) {
  StubConfig cfg;
  cfg.proposals = {"alpha"};
  Gateway gw(std::make_shared<StubBackend>(cfg), "[MASK]");
  EXPECT_EQ(gw.ProposeSubstitutes("int [MASK];", 5, Language::kC).front().token, "alpha");
  EXPECT_ICL_ERROR(gw.ProposeSubstitutes("int <mask>;", 5, Language::kC), ErrorCode::kNoMask);
}

TEST(Embed, UnitNorm) {
  auto gw = StubGateway();
  auto v = gw.Embed("for (int i = 0; i < n; ++i) sum += a[i];");
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
}

TEST(Embed, DistinctTextsAreNotParallel) {
  auto gw = StubGateway();
  auto a = gw.Embed("return a + b;");
  auto b = gw.Embed("while (queue.size() > 0) queue.pop();");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  EXPECT_LT(dot, 1.0);
}

TEST(Embed, EmptyTextRejected) {
  auto gw = StubGateway();
  EXPECT_ICL_ERROR(gw.Embed(""), ErrorCode::kInvalidArgument);
}

TEST(LogLikelihoods, UniformDefault) {
  auto gw = StubGateway();
  auto lp = gw.LogLikelihoods("int x = 1;");
  ASSERT_EQ(lp.size(), 4u);
  for (const auto& t : lp) EXPECT_DOUBLE_EQ(t.log_prob, -1.0);
  EXPECT_NEAR(Perplexity(lp), std::exp(1.0), 1e-12);
  EXPECT_DOUBLE_EQ(Perplexity({}), 1.0);
}

TEST(LogLikelihoods, EmptyTextRejected) {
  auto gw = StubGateway();
  EXPECT_ICL_ERROR(gw.LogLikelihoods(""), ErrorCode::kInvalidArgument);
}

TEST(Counting, ScopedViewsSeeOnlyTheirOwnCalls) {
  auto gw = StubGateway();
  auto a = gw.Scoped();
  auto b = gw.Scoped();
  a.Classify(Chat("x"), kLabels);
  a.Complete(Chat("y"), DefaultParams(TaskMode::kGeneration));
  b.Classify(Chat("z"), kLabels);
  b.Embed("z");
  EXPECT_EQ(a.Counts().ModelQueries(), 2u);
  EXPECT_EQ(b.Counts().ModelQueries(), 1u);
  EXPECT_EQ(b.Counts().embed, 1u);
  EXPECT_EQ(gw.GlobalCounts().ModelQueries(), 3u);
  EXPECT_EQ(gw.GlobalCounts().Total(), 4u);
}

TEST(Complete, ParamsAreValidated) {
  auto gw = StubGateway({.mode = TaskMode::kGeneration});
  EXPECT_ICL_ERROR(gw.Complete(Chat("x"), {.max_tokens = 0}), ErrorCode::kInvalidArgument);
  EXPECT_ICL_ERROR(gw.Complete(Chat("x"), {.max_tokens = 5, .temperature = -1.0}),
                   ErrorCode::kInvalidArgument);
  EXPECT_EQ(gw.Complete(Chat("x"), {}), gw.Complete(Chat("x"), {}));
}

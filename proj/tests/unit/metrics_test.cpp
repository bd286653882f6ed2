#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "iclforge/metrics/bertscore.hpp"
#include "iclforge/metrics/bleu.hpp"
#include "iclforge/metrics/classification.hpp"
#include "iclforge/metrics/generation.hpp"
#include "iclforge/metrics/meteor.hpp"
#include "iclforge/metrics/porter_stemmer.hpp"
#include "iclforge/metrics/rouge.hpp"
#include "iclforge/metrics/tokenize.hpp"
#include "support/oracles.hpp"
#include "test_util.hpp"

using namespace iclforge;
using namespace iclforge::metrics;

namespace {

std::string RandomText(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> vocab = {"the", "cat", "sat", "on", "mat", "dog",
                                                 "runs", "running", "ran", "a"};
  std::size_t len = 1 + rng() % max_len;
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out += (i ? " " : "") + vocab[rng() % vocab.size()];
  return out;
}

}  // namespace

TEST(Classification, PerfectTally) {
  ClassificationTally t{5, 0, 5, 0};
  EXPECT_DOUBLE_EQ(Accuracy(t), 1.0);
  EXPECT_DOUBLE_EQ(F1(t), 1.0);
}

TEST(Classification, F1ByHand) {
  ClassificationTally t{.tp = 2, .fp = 1, .tn = 0, .fn = 1};
  double p = 2.0 / 3.0, r = 2.0 / 3.0;
  EXPECT_NEAR(F1(t), 2 * p * r / (p + r), 1e-12);
  EXPECT_NEAR(F1(t), 0.6667, 1e-4);
}

TEST(Classification, ZeroDivisionF1) {
  EXPECT_DOUBLE_EQ(F1({.tp = 0, .fp = 0, .tn = 0, .fn = 3}), 0.0);
}

TEST(Classification, EmptyTallyRejected) {
  EXPECT_ICL_ERROR(Accuracy({}), ErrorCode::kInvalidArgument);
  EXPECT_ICL_ERROR(F1({}), ErrorCode::kInvalidArgument);
}

TEST(Classification, TallyMatchesRawLists) {
  std::vector<std::string> pred = {"1", "1", "0", "0", "1", "0", "1"};
  std::vector<std::string> truth = {"1", "0", "0", "1", "1", "0", "0"};
  auto t = Tally(pred, truth, "1");
  EXPECT_EQ(t, (ClassificationTally{2, 2, 2, 1}));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  EXPECT_DOUBLE_EQ(Accuracy(t), static_cast<double>(correct) / pred.size());
}

TEST(Rates, AsrAndAccDrop) {
  EXPECT_DOUBLE_EQ(Asr(2, 8), 0.25);
  EXPECT_NEAR(AccDrop(0.60, 0.15), -0.45, 1e-12);
  EXPECT_ICL_ERROR(Asr(0, 0), ErrorCode::kEligibleZero);
}

TEST(Rates, QueryTime) {
  EXPECT_DOUBLE_EQ(QueryTime(10, 5), 2.0);
  EXPECT_DOUBLE_EQ(QueryTime(7, 7), 1.0);
  EXPECT_ICL_ERROR(QueryTime(12, 0), ErrorCode::kNoFlips);
}

TEST(Bleu, IdentityAndDisjoint) {
  EXPECT_NEAR(SentenceBleu("the cat is on the mat", "the cat is on the mat"), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(SentenceBleu("alpha beta gamma", "the cat is on the mat"), 0.0);
}

TEST(Bleu, ClippedUnigramPrecision) {
  auto cand = Tokenize("the the the the the the the");
  auto ref = Tokenize("the cat is on the mat");
  std::vector<std::vector<std::string>> refs = {ref};
  auto stats = ComputeBleuStats(cand, refs);
  auto [m, t] = oracle::ClippedCounts(cand, ref, 1);
  EXPECT_EQ(stats.matches[0], m);
  EXPECT_EQ(stats.totals[0], t);
  EXPECT_EQ(m, 2u);
  EXPECT_EQ(t, 7u);
}

TEST(Bleu, EmptyReference) {
  EXPECT_ICL_ERROR(SentenceBleu("a b", ""), ErrorCode::kEmptyReference);
}

TEST(Bleu, RandomizedAgainstOracle) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    auto c = RandomText(rng, 9), r = RandomText(rng, 9);
    EXPECT_NEAR(SentenceBleu(c, r), oracle::SentenceBleu(Tokenize(c), Tokenize(r)), 1e-6) << c << " | " << r;
  }
}

TEST(Rouge, FixtureFromFormula) {
  auto c = Tokenize("a b c d"), r = Tokenize("a c e");
  EXPECT_EQ(LcsLength(c, r), 2u);
  double p = 2.0 / 4.0, rc = 2.0 / 3.0;
  EXPECT_NEAR(RougeL("a b c d", "a c e"), 9.0 * p * rc / (rc + 8.0 * p), 1e-12);
}

TEST(Rouge, IdentityDisjointEmpty) {
  EXPECT_DOUBLE_EQ(RougeL("x y z", "x y z"), 1.0);
  EXPECT_DOUBLE_EQ(RougeL("x y z", "p q"), 0.0);
  EXPECT_ICL_ERROR(RougeL("", "p"), ErrorCode::kEmptyInput);
}

TEST(Rouge, RandomizedAgainstOracle) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    auto c = RandomText(rng, 10), r = RandomText(rng, 10);
    EXPECT_NEAR(RougeL(c, r), oracle::RougeL(Tokenize(c), Tokenize(r), kRougeBeta2), 1e-6);
  }
}

TEST(Meteor, IdentityDisjoint) {
  EXPECT_NEAR(Meteor("the cat sat down", "the cat sat down"), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(Meteor("alpha beta", "gamma delta"), 0.0);
  EXPECT_ICL_ERROR(Meteor("a", ""), ErrorCode::kEmptyInput);
}

TEST(Meteor, ReorderPaysFragmentation) {
  // "b a c d" vs "a b c d": 4 matches in 3 chunks.
  double fmean = 1.0;
  double frag = 3.0 / 4.0;
  double expected = fmean * (1.0 - 0.5 * frag * frag * frag);
  EXPECT_NEAR(Meteor("cat the sat down", "the cat sat down"), expected, 1e-12);
  EXPECT_LT(Meteor("cat the sat down", "the cat sat down"), Meteor("the cat sat down", "the cat sat down"));
}

TEST(Meteor, StemStageMatches) {
  EXPECT_GT(Meteor("running dogs", "run dog"), 0.0);
}

TEST(Meteor, RandomizedAgainstOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto c = RandomText(rng, 7), r = RandomText(rng, 7);
    EXPECT_NEAR(Meteor(c, r), oracle::MeteorByEnumeration(Tokenize(c), Tokenize(r)).score, 1e-6)
        << c << " | " << r;
  }
}

TEST(BertScore, IdentityAndOrthogonal) {
  EXPECT_NEAR(BertScoreFromVectors({{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}), 1.0, 1e-12);
  EXPECT_NEAR(BertScoreFromVectors({{1, 0}}, {{0, 1}}), 0.0, 1e-12);
}

TEST(BertScore, TwoByThreeExhaustive) {
  std::vector<std::vector<double>> x = {{1, 2, 0}, {0, 1, 1}};
  std::vector<std::vector<double>> y = {{1, 0, 0}, {0, 0, 1}, {1, 1, 1}};
  EXPECT_NEAR(BertScoreFromVectors(x, y), oracle::BertScoreExhaustive(x, y), 1e-12);
  std::vector<std::vector<double>> y_perm = {y[2], y[0], y[1]};
  EXPECT_NEAR(BertScoreFromVectors(x, y_perm), BertScoreFromVectors(x, y), 1e-12);
}

TEST(BertScore, TextsWithStubbedTokens) {
  TokenEmbedder embed = [](std::string_view t) -> std::vector<double> {
    if (t == "a") return {1, 0};
    if (t == "b") return {0, 1};
    return {1, 1};
  };
  EXPECT_NEAR(BertScore("a b", "a b", embed), 1.0, 1e-12);
  EXPECT_NEAR(BertScore("a", "b", embed), 0.0, 1e-12);
  EXPECT_NEAR(BertScore("a b", "c", embed), std::sqrt(0.5), 1e-12);
}

TEST(BertScore, RandomizedAgainstOracle) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::vector<double>> x(1 + rng() % 4, std::vector<double>(3)), y(1 + rng() % 4, std::vector<double>(3));
    for (auto& v : x) for (auto& e : v) e = g(rng);
    for (auto& v : y) for (auto& e : v) e = g(rng);
    EXPECT_NEAR(BertScoreFromVectors(x, y), oracle::BertScoreExhaustive(x, y), 1e-9);
  }
}

TEST(AvgDrop, Identity) {
  GenerationScores s{0.3, 0.4, 0.5, 0.0};
  EXPECT_DOUBLE_EQ(AvgDrop(s, s), 0.0);
}

TEST(AvgDrop, Halving) {
  GenerationScores b{0.4, 0.6, 0.2, 0.0}, a{0.2, 0.3, 0.1, 0.0};
  EXPECT_NEAR(AvgDrop(b, a), -50.0, 1e-9);
}

TEST(AvgDrop, MixedRatios) {
  GenerationScores b{.bleu = 0.10, .rouge_l = 0.20, .meteor = 0.20};
  GenerationScores a{.bleu = 0.05, .rouge_l = 0.10, .meteor = 0.15};
  EXPECT_NEAR(AvgDrop(b, a), (-50.0 - 50.0 - 25.0) / 3.0, 1e-9);
  EXPECT_NEAR(AvgDrop(b, a), -41.67, 0.005);
}

TEST(AvgDrop, ZeroBaselineNamesMetric) {
  try {
    AvgDrop({.bleu = 0.0, .rouge_l = 0.2, .meteor = 0.2}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroBaseline);
    EXPECT_NE(e.detail().find("bleu"), std::string::npos);
  }
}

TEST(Generation, Mean3AndRanges) {
  auto s = ScoreGeneration("returns the sum of two numbers", "return the sum of the numbers");
  for (double v : {s.bleu, s.rouge_l, s.meteor}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_DOUBLE_EQ(s.Mean3(), (s.bleu + s.meteor + s.rouge_l) / 3.0);
  auto empty = ScoreGeneration("", "x");
  EXPECT_DOUBLE_EQ(empty.Mean3(), 0.0);
}

TEST(Tokenizer, LowercaseAndPunctuation) {
  EXPECT_EQ(Tokenize("Hello, World!"), (std::vector<std::string>{"hello", ",", "world", "!"}));
}

TEST(Porter, ReferenceVectors) {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"}, {"ponies", "poni"},     {"ties", "ti"},         {"caress", "caress"},
      {"cats", "cat"},        {"feed", "feed"},       {"agreed", "agre"},     {"plastered", "plaster"},
      {"bled", "bled"},       {"motoring", "motor"},  {"sing", "sing"},       {"conflated", "conflat"},
      {"troubled", "troubl"}, {"sized", "size"},      {"hopping", "hop"},     {"tanned", "tan"},
      {"falling", "fall"},    {"hissing", "hiss"},    {"fizzed", "fizz"},     {"failing", "fail"},
      {"filing", "file"},     {"happy", "happi"},     {"sky", "sky"},         {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"}, {"digitizer", "digit"},
      {"generalization", "gener"}, {"oscillators", "oscil"}, {"adjustable", "adjust"},
      {"effective", "effect"}};
  for (const auto& [in, out] : cases) EXPECT_EQ(PorterStem(in), out) << in;
}

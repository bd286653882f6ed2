#include <algorithm>
#include <memory>

#include <gtest/gtest.h>

#include "iclforge/modelgw/stub_backend.hpp"
#include "iclforge/mutation/analysis.hpp"
#include "iclforge/substitution.hpp"
#include "support/fixtures.hpp"
#include "test_util.hpp"

using namespace iclforge;
using namespace iclforge::substitution;

namespace {

const std::string kCode = "int f(int n) {\n  int x = n * 2;\n  return x + n;\n}\n";

struct Harness {
  explicit Harness(modelgw::StubConfig cfg = {})
      : gw(std::make_shared<modelgw::StubBackend>(std::move(cfg))), embedder(gw) {}
  modelgw::Gateway gw;
  retrieval::Embedder embedder;
};

mutation::VariableSite SiteX(const std::string& code = kCode) {
  return mutation::ExtractVariables(code, Language::kC).at(0);
}

}  // namespace

TEST(Mask, FirstOccurrenceOnly) {
  const std::string code = "def f():\n    x = 1\n    y = x\n    return y\n";
  auto sites = mutation::ExtractVariables(code, Language::kPython);
  auto x = *std::find_if(sites.begin(), sites.end(), [](const auto& s) { return s.name == "x"; });
  EXPECT_EQ(MaskFirstOccurrence(code, x, "<mask>"), "def f():\n    <mask> = 1\n    y = x\n    return y\n");
  std::string masked = MaskFirstOccurrence(code, x, "<mask>");
  masked.replace(masked.find("<mask>"), 6, "x");
  EXPECT_EQ(masked, code);
}

TEST(Mask, SingleOccurrence) {
  mutation::VariableSite site{"x", {{7, 1}}, true, true, 0};
  EXPECT_EQ(MaskFirstOccurrence("return x;", site, "<mask>"), "return <mask>;");
}

TEST(Build, DefaultsKeepAtMostForty) {
  Harness h;
  Options opts;
  EXPECT_EQ(opts.i, 80u);
  EXPECT_EQ(opts.k, 40u);
  auto set = BuildSubstituteSet(kCode, SiteX(), Language::kC, opts, h.gw, h.embedder);
  EXPECT_LE(set.candidates.size(), 40u);
  EXPECT_FALSE(set.candidates.empty());
  for (const auto& c : set.candidates) {
    EXPECT_FALSE(ContainsWord(kCode, c.identifier));
    EXPECT_FALSE(IsReservedWord(c.identifier, Language::kC));
  }
  for (std::size_t j = 1; j < set.candidates.size(); ++j) {
    EXPECT_GE(set.candidates[j - 1].similarity, set.candidates[j].similarity);
  }
}

TEST(Build, ThreeProposalsMatchExhaustiveRanking) {
  modelgw::StubConfig cfg;
  cfg.proposals = {"tmp", "val", "cnt"};
  Harness h(cfg);
  auto site = SiteX();
  auto set = BuildSubstituteSet(kCode, site, Language::kC, {}, h.gw, h.embedder);
  ASSERT_EQ(set.candidates.size(), 3u);

  // Oracle: embed each candidate context directly and order every pair.
  auto original = h.gw.Embed(kCode);
  std::vector<std::pair<double, std::string>> expected;
  for (std::string t : {"tmp", "val", "cnt"}) {
    std::string ctx = kCode;
    ctx.replace(site.occurrences[0].offset, site.occurrences[0].length, t);
    auto e = h.gw.Embed(ctx);
    double dot = 0.0;
    for (std::size_t d = 0; d < e.values.size(); ++d) dot += e.values[d] * original.values[d];
    expected.push_back({dot, t});
  }
  std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(set.candidates[j].identifier, expected[j].second);
    EXPECT_NEAR(set.candidates[j].similarity, expected[j].first, 1e-12);
  }
}

TEST(Build, AllCollisionsIsNoProposals) {
  modelgw::StubConfig cfg;
  cfg.proposals = {"n", "f", "x", "return"};
  Harness h(cfg);
  EXPECT_ICL_ERROR(BuildSubstituteSet(kCode, SiteX(), Language::kC, {}, h.gw, h.embedder),
                   ErrorCode::kNoProposals);
}

TEST(Build, ShrinkingKIsAPrefix) {
  Harness h;
  auto wide = BuildSubstituteSet(kCode, SiteX(), Language::kC, {80, 40}, h.gw, h.embedder);
  auto narrow = BuildSubstituteSet(kCode, SiteX(), Language::kC, {80, 5}, h.gw, h.embedder);
  ASSERT_LE(narrow.candidates.size(), 5u);
  for (std::size_t j = 0; j < narrow.candidates.size(); ++j) {
    EXPECT_EQ(narrow.candidates[j].identifier, wide.candidates[j].identifier);
  }
}

TEST(Build, CandidatesAlwaysRenameCleanly) {
  Harness h;
  for (const auto& s : fixtures::MutationCorpus(2, 5)) {
    for (const auto& site : mutation::ExtractVariables(s.code, s.lang)) {
      auto set = BuildSubstituteSet(s.code, site, s.lang, {20, 10}, h.gw, h.embedder);
      for (const auto& c : set.candidates) {
        EXPECT_FALSE(ContainsWord(s.code, c.identifier)) << c.identifier;
        EXPECT_FALSE(IsReservedWord(c.identifier, s.lang)) << c.identifier;
      }
    }
  }
}

TEST(Build, BadLimits) {
  Harness h;
  EXPECT_ICL_ERROR(BuildSubstituteSet(kCode, SiteX(), Language::kC, {5, 10}, h.gw, h.embedder),
                   ErrorCode::kInvalidArgument);
  EXPECT_ICL_ERROR(BuildSubstituteSet(kCode, SiteX(), Language::kC, {5, 0}, h.gw, h.embedder),
                   ErrorCode::kInvalidArgument);
}

TEST(Sort, TiesBreakLexicographically) {
  std::vector<Candidate> c = {{"b", 0.5}, {"a", 0.5}, {"z", 0.9}};
  SortCandidates(c);
  EXPECT_EQ(c[0].identifier, "z");
  EXPECT_EQ(c[1].identifier, "a");
  EXPECT_EQ(c[2].identifier, "b");
}

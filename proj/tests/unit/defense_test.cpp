#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "iclforge/defense.hpp"
#include "iclforge/modelgw/stub_backend.hpp"
#include "test_util.hpp"

using namespace iclforge;
using namespace iclforge::defense;

namespace {

const TaskKind kDefect{TaskVariant::kDefectDetection, Language::kC};
using Scores = std::map<std::string, double>;

attack::IclContent Icl(std::vector<attack::DemoPair> demos, std::string query = "int q = 0;") {
  return attack::AssembleIcl(demos, {"q", query, std::nullopt}, kDefect, "sys", "task");
}

modelgw::Gateway Gw(modelgw::StubConfig cfg = {}) {
  return modelgw::Gateway(std::make_shared<modelgw::StubBackend>(std::move(cfg)));
}

const std::vector<std::string> kBenign = {"int a = 1;\nint b = 2;", "x++;", "return 0;"};

double PplOf(const std::vector<double>& lp) {
  double s = 0.0;
  for (double v : lp) s -= v;
  return std::exp(s / static_cast<double>(lp.size()));
}

}  // namespace

TEST(Onion, InjectedRareTokenIsTheUniqueMaximum) {
  modelgw::StubConfig cfg;
  cfg.logprob_overrides = {{"zzq", -10.0}};
  auto gw = Gw(cfg);
  // 7 tokens: int v = zzq + 1 ;
  auto icl = Icl({{"int v = zzq + 1 ;", "0"}});
  auto [out, report] = OnionFilter(icl, 0.0, gw);
  ASSERT_EQ(report.tokens.size(), 7u);

  std::vector<double> full = {-1, -1, -1, -10, -1, -1, -1};
  double ppl = PplOf(full);
  double without_rare = PplOf({-1, -1, -1, -1, -1, -1});
  double without_common = PplOf({-1, -1, -10, -1, -1, -1});
  EXPECT_NEAR(report.tokens[3].score, ppl - without_rare, 1e-9);
  EXPECT_NEAR(report.tokens[0].score, ppl - without_common, 1e-9);
  for (std::size_t i = 0; i < report.tokens.size(); ++i) {
    if (i != 3) EXPECT_LT(report.tokens[i].score, report.tokens[3].score);
  }
  ASSERT_EQ(report.removed, std::vector<std::size_t>{3});
  EXPECT_EQ(out.demos[0].code.find("zzq"), std::string::npos);
  EXPECT_EQ(out.query_code, icl.query_code);
  EXPECT_EQ(out.demos[0].answer, "0");
}

TEST(Onion, UniformLogprobsRemoveNothing) {
  auto gw = Gw();
  auto icl = Icl({{"int a = b + c ;", "1"}, {"return a ;", "0"}});
  auto [out, report] = OnionFilter(icl, 0.1, gw);
  for (const auto& t : report.tokens) EXPECT_NEAR(t.score, 0.0, 1e-12);
  EXPECT_TRUE(report.removed.empty());
  EXPECT_EQ(out, icl);
}

TEST(Onion, ZeroShotIsIdentity) {
  auto gw = Gw();
  auto icl = Icl({});
  auto [out, report] = OnionFilter(icl, 0.1, gw);
  EXPECT_EQ(out, icl);
  EXPECT_TRUE(report.tokens.empty());
  EXPECT_EQ(gw.Counts().logprobs, 0u);
}

TEST(Onion, OnlyDemoCodeChanges) {
  modelgw::StubConfig cfg;
  cfg.logprob_overrides = {{"zzq", -10.0}};
  auto gw = Gw(cfg);
  auto icl = Icl({{"int zzq = 1 ;", "1"}}, "int zzq = 2;");
  auto out = OnionFilter(icl, 0.0, gw).first;
  auto before = icl.Turns(), after = out.Turns();
  ASSERT_EQ(before.size(), after.size());
  EXPECT_EQ(after[0], before[0]);
  EXPECT_EQ(after[2], before[2]);
  EXPECT_EQ(after.back(), before.back());
  EXPECT_NE(after[1], before[1]);
}

TEST(Strip, ConstantLabelIsSuspicious) {
  modelgw::StubConfig cfg;
  cfg.classify_hook = [](const auto&, const auto&) { return Scores{{"0", 0.9}, {"1", 0.1}}; };
  auto gw = Gw(cfg);
  auto v = StripDetect(Icl({{"int a = 1;", "0"}}), 10, 0.1, 7, kBenign, gw);
  EXPECT_DOUBLE_EQ(v.entropy, 0.0);
  EXPECT_EQ(v.verdict, Verdict::kSuspicious);
  EXPECT_EQ(v.label_counts.at("0"), 10u);
  EXPECT_EQ(gw.Counts().classify, 10u);
}

TEST(Strip, EvenSplitIsOneBit) {
  int calls = 0;
  modelgw::StubConfig cfg;
  cfg.classify_hook = [&calls](const auto&, const auto&) {
    return (calls++ % 2 == 0) ? Scores{{"0", 0.9}, {"1", 0.1}} : Scores{{"0", 0.1}, {"1", 0.9}};
  };
  auto gw = Gw(cfg);
  auto v = StripDetect(Icl({{"int a = 1;", "0"}}), 10, 0.1, 7, kBenign, gw);
  EXPECT_NEAR(v.entropy, 1.0, 1e-12);
  EXPECT_EQ(v.verdict, Verdict::kClean);
}

TEST(Strip, SeededRunsAgree) {
  auto gw = Gw({.seed = 5, .noise_scale = 3.0});
  auto icl = Icl({{"int a = 1;\nint b = a;", "0"}, {"char c = 0;", "1"}});
  auto a = StripDetect(icl, 12, 0.5, 42, kBenign, gw);
  auto b = StripDetect(icl, 12, 0.5, 42, kBenign, gw);
  EXPECT_EQ(a.entropy, b.entropy);
  EXPECT_EQ(a.label_counts, b.label_counts);
  EXPECT_EQ(a.verdict, b.verdict);
  EXPECT_GE(a.entropy, 0.0);
  EXPECT_LE(a.entropy, 1.0);
}

TEST(Strip, NeedsTwoPerturbations) {
  auto gw = Gw();
  EXPECT_ICL_ERROR(StripDetect(Icl({{"int a;", "0"}}), 1, 0.1, 0, kBenign, gw),
                   ErrorCode::kInvalidArgument);
}

TEST(Strip, InterleaveCodeFirst) {
  EXPECT_EQ(InterleaveLines("a\nb\nc", "x\ny"), "a\nx\nb\ny\nc\n");
}

TEST(Entropy, Bits) {
  EXPECT_DOUBLE_EQ(ShannonEntropyBits({{"0", 4}}), 0.0);
  EXPECT_DOUBLE_EQ(ShannonEntropyBits({{"0", 2}, {"1", 2}}), 1.0);
  EXPECT_DOUBLE_EQ(ShannonEntropyBits({}), 0.0);
}

TEST(Evaluate, IdentityDefenseKeepsAsr) {
  modelgw::StubConfig cfg;
  cfg.classify_hook = [](const modelgw::Transcript& t, const auto&) {
    for (const auto& turn : t) {
      if (ContainsWord(turn.content, "zzq")) return Scores{{"0", 0.8}, {"1", 0.2}};
    }
    return Scores{{"0", 0.2}, {"1", 0.8}};
  };
  auto gw = Gw(cfg);
  attack::Evaluator ev(gw, kDefect);
  auto base = ev.Evaluate(Icl({{"int a = 1 ;", "1"}}));
  std::vector<AttackedCase> cases = {{Icl({{"int zzq = 1 ;", "1"}}), base, true},
                                     {Icl({{"int b = 1 ;", "1"}}), base, false}};
  auto r = EvaluateDefense(cases, [](const attack::IclContent& i) { return i; }, {}, ev);
  EXPECT_DOUBLE_EQ(r.asr_before, 0.5);
  EXPECT_DOUBLE_EQ(r.asr_after, 0.5);
}

TEST(Evaluate, OnionRemovesTheFlipToken) {
  modelgw::StubConfig cfg;
  cfg.logprob_overrides = {{"zzq", -10.0}};
  cfg.classify_hook = [](const modelgw::Transcript& t, const auto&) {
    for (const auto& turn : t) {
      if (ContainsWord(turn.content, "zzq")) return Scores{{"0", 0.8}, {"1", 0.2}};
    }
    return Scores{{"0", 0.2}, {"1", 0.8}};
  };
  auto gw = Gw(cfg);
  attack::Evaluator ev(gw, kDefect);
  auto base = ev.Evaluate(Icl({{"int a = 1 ;", "1"}}));
  std::vector<AttackedCase> cases = {{Icl({{"int zzq = 1 ;", "1"}}), base, true}};
  // Removal restores the original label on the stub.
  EXPECT_EQ(ev.Evaluate(OnionFilter(cases[0].bad_icl, 0.5, gw).first).label, base.label);
  auto r = EvaluateDefense(cases, OnionDefense(gw, 0.5), {}, ev);
  EXPECT_DOUBLE_EQ(r.asr_before, 1.0);
  EXPECT_LT(r.asr_after, r.asr_before);
}

TEST(Evaluate, EmptyListIsEligibleZero) {
  auto gw = Gw();
  attack::Evaluator ev(gw, kDefect);
  EXPECT_ICL_ERROR(EvaluateDefense({}, [](const auto& i) { return i; }, {}, ev),
                   ErrorCode::kEligibleZero);
}

TEST(Calibrate, FalseRejectionRate) {
  std::vector<double> s;
  for (int i = 1; i <= 100; ++i) s.push_back(i);
  double up = CalibrateUpper(s, 0.05);
  double lo = CalibrateLower(s, 0.05);
  EXPECT_LE(std::count_if(s.begin(), s.end(), [&](double v) { return v > up; }), 5);
  EXPECT_LE(std::count_if(s.begin(), s.end(), [&](double v) { return v < lo; }), 5);
}

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "iclforge/mutation/mutation.hpp"
#include "test_util.hpp"

using namespace iclforge;
using namespace iclforge::mutation;

namespace {

// Whole-word positions of `name`, by plain scanning.
std::vector<Occurrence> ScanWord(const std::string& code, const std::string& name) {
  std::vector<Occurrence> out;
  for (std::size_t i = 0; i + name.size() <= code.size(); ++i) {
    if (code.compare(i, name.size(), name) != 0) continue;
    bool left = i == 0 || !IsIdentChar(code[i - 1]);
    bool right = i + name.size() == code.size() || !IsIdentChar(code[i + name.size()]);
    if (left && right) out.push_back({i, name.size()});
  }
  return out;
}

const VariableSite* Find(const std::vector<VariableSite>& sites, const std::string& name) {
  for (const auto& s : sites) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace

TEST(Extract, PythonLocalWithUndefinedGlobal) {
  const std::string code = "def f():\n    x = 1\n    return x + g";
  auto sites = ExtractVariables(code, Language::kPython);
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].name, "x");
  EXPECT_EQ(sites[0].occurrences, ScanWord(code, "x"));
  EXPECT_EQ(sites[0].occurrences.size(), 2u);
  EXPECT_TRUE(sites[0].Eligible());
}

TEST(Extract, CWithoutLocals) {
  EXPECT_TRUE(ExtractVariables("int main(){ return 0; }", Language::kC).empty());
}

TEST(Extract, JavaFieldConflictExcluded) {
  const std::string code = "class A { int x; void m(){ int x = 1; use(x); } }";
  auto sites = ExtractVariables(code, Language::kJava);
  EXPECT_EQ(Find(sites, "x"), nullptr);
  // Without the field the same local is eligible.
  auto plain = ExtractVariables("class A { void m(){ int x = 1; use(x); } }", Language::kJava);
  ASSERT_NE(Find(plain, "x"), nullptr);
}

TEST(Extract, ParametersAndCalleesAreNotSites) {
  const std::string code = "int f(int p) {\n  int a = p + 1;\n  g(a);\n  return a;\n}\n";
  auto sites = ExtractVariables(code, Language::kC);
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].name, "a");
  EXPECT_EQ(sites[0].occurrences, ScanWord(code, "a"));
}

TEST(Extract, ComprehensionVariablesExcluded) {
  const std::string code = "def f(xs):\n    total = sum([i * 2 for i in xs])\n    return total\n";
  auto sites = ExtractVariables(code, Language::kPython);
  EXPECT_NE(Find(sites, "total"), nullptr);
  EXPECT_EQ(Find(sites, "i"), nullptr);
}

TEST(Extract, InvalidCodeIsParseError) {
  EXPECT_ICL_ERROR(ExtractVariables("int f( { return", Language::kC), ErrorCode::kParseError);
  EXPECT_ICL_ERROR(ExtractVariables("def f(:\n  pass", Language::kPython), ErrorCode::kParseError);
}

TEST(Extract, StableAcrossCalls) {
  for (const auto& s : fixtures::MutationCorpus(5, 3)) {
    auto a = ExtractVariables(s.code, s.lang);
    auto b = ExtractVariables(s.code, s.lang);
    EXPECT_EQ(a, b);
    for (std::size_t i = 1; i < a.size(); ++i) {
      EXPECT_LT(a[i - 1].occurrences.front().offset, a[i].occurrences.front().offset);
    }
  }
}

TEST(Extract, ClonePairSitesStayInTheirHalf) {
  const std::string code = "int f() {\n  int a = 1;\n  return a;\n}\n// ---\nint g() {\n  int a = 2;\n  return a;\n}";
  auto sites = ExtractVariables(code, Language::kC);
  ASSERT_EQ(sites.size(), 2u);
  EXPECT_EQ(sites[0].segment, 0u);
  EXPECT_EQ(sites[1].segment, 1u);
  EXPECT_EQ(sites[0].occurrences.size(), 2u);
  EXPECT_EQ(sites[1].occurrences.size(), 2u);
  EXPECT_GT(sites[1].occurrences.front().offset, code.find("// ---"));
}

TEST(Rename, DirectSubstitution) {
  const std::string code = "def f():\n    x = 1\n    return x\n";
  auto site = ExtractVariables(code, Language::kPython).at(0);
  auto m = Rename(code, site, "y", Language::kPython);
  EXPECT_EQ(m.code, "def f():\n    y = 1\n    return y\n");
  EXPECT_EQ(m.from, "x");
  EXPECT_EQ(m.to, "y");
  EXPECT_EQ(ScanWord(m.code, "y").size(), ScanWord(code, "x").size());
  EXPECT_TRUE(ValidateMutant(m, code, Language::kPython));
}

TEST(Rename, ReservedWord) {
  const std::string code = "int f() {\n  int x = 1;\n  return x;\n}\n";
  auto site = ExtractVariables(code, Language::kC).at(0);
  EXPECT_ICL_ERROR(Rename(code, site, "return", Language::kC), ErrorCode::kReservedWord);
}

TEST(Rename, Collision) {
  const std::string code = "int f(int n) {\n  int x = n;\n  return x;\n}\n";
  auto site = ExtractVariables(code, Language::kC).at(0);
  EXPECT_ICL_ERROR(Rename(code, site, "n", Language::kC), ErrorCode::kSubstituteCollision);
  EXPECT_ICL_ERROR(Rename(code, site, "f", Language::kC), ErrorCode::kSubstituteCollision);
}

TEST(Rename, NotAnIdentifier) {
  const std::string code = "int f() {\n  int x = 1;\n  return x;\n}\n";
  auto site = ExtractVariables(code, Language::kC).at(0);
  EXPECT_ICL_ERROR(Rename(code, site, "9lives", Language::kC), ErrorCode::kInvalidArgument);
}

TEST(Rename, RoundTripIsByteIdentical) {
  for (const auto& s : fixtures::MutationCorpus(4, 9)) {
    for (const auto& site : ExtractVariables(s.code, s.lang)) {
      auto there = Rename(s.code, site, "zz_fresh", s.lang);
      auto back_site = LocateSite(there.code, "zz_fresh", site.segment, s.lang);
      ASSERT_TRUE(back_site.has_value());
      auto back = Rename(there.code, *back_site, site.name, s.lang);
      EXPECT_EQ(back.code, s.code);
    }
  }
}

TEST(Validate, ExtraSemicolonFails) {
  const std::string code = "int f() {\n  int x = 1;\n  return x;\n}\n";
  auto site = ExtractVariables(code, Language::kC).at(0);
  auto m = Rename(code, site, "y", Language::kC);
  m.code.insert(m.code.find("return"), ";");
  EXPECT_FALSE(ValidateMutant(m, code, Language::kC));
}

TEST(Validate, TwoVariablesAtOnceFails) {
  const std::string code = "int f() {\n  int x = 1;\n  int z = x;\n  return x + z;\n}\n";
  Mutant m{"int f() {\n  int y = 1;\n  int w = y;\n  return y + w;\n}\n", "x", "y", ""};
  EXPECT_FALSE(ValidateMutant(m, code, Language::kC));
  // A chain of two consistent renames is still a renaming.
  EXPECT_TRUE(IsRenamingOf(code, m.code, Language::kC));
}

TEST(Validate, PartialRenameFails) {
  const std::string code = "int f() {\n  int x = 1;\n  return x;\n}\n";
  Mutant m{"int f() {\n  int y = 1;\n  return x;\n}\n", "x", "y", ""};
  EXPECT_FALSE(ValidateMutant(m, code, Language::kC));
}

TEST(Delete, RemovesIdentifierOnly) {
  const std::string code = "def f():\n    x = 1\n    return x + 2\n";
  auto site = ExtractVariables(code, Language::kPython).at(0);
  EXPECT_EQ(DeleteOccurrences(code, site), "def f():\n     = 1\n    return  + 2\n");
}

TEST(Locate, FindsRenamedSite) {
  const std::string code = "int f() {\n  int x = 1;\n  return x;\n}\n";
  EXPECT_TRUE(LocateSite(code, "x", 0, Language::kC).has_value());
  EXPECT_FALSE(LocateSite(code, "q", 0, Language::kC).has_value());
}

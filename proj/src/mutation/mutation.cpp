#include "iclforge/mutation/mutation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "iclforge/error.hpp"
#include "iclforge/hash.hpp"
#include "iclforge/mutation/lexer.hpp"

namespace iclforge::mutation {

namespace {

void CheckSiteMatches(std::string_view code, const VariableSite& site) {
  if (site.occurrences.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "site '" + site.name + "' has no occurrences");
  }
  for (const Occurrence& o : site.occurrences) {
    if (o.offset + o.length > code.size() || code.substr(o.offset, o.length) != site.name) {
      throw Error(ErrorCode::kInvalidArgument,
                  "occurrence of '" + site.name + "' does not match the code", o.offset);
    }
  }
}

std::string ReplaceOccurrences(std::string_view code, const VariableSite& site,
                               std::string_view replacement) {
  std::string out(code);
  std::vector<Occurrence> occ = site.occurrences;
  std::sort(occ.begin(), occ.end(),
            [](const Occurrence& a, const Occurrence& b) { return a.offset > b.offset; });
  for (const Occurrence& o : occ) out.replace(o.offset, o.length, replacement);
  return out;
}

struct SegmentTokens {
  std::vector<Token> tokens;
  std::string_view text;
};

std::optional<std::vector<SegmentTokens>> TokenizeSegments(std::string_view code, Language lang) {
  std::vector<SegmentTokens> out;
  try {
    for (const Segment& seg : SplitSegments(code)) {
      out.push_back({Tokenize(seg.text, lang), seg.text});
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return out;
}

}  // namespace

Mutant Rename(std::string_view code, const VariableSite& site,
              std::string_view substitute, Language lang) {
  if (!IsIdentifier(substitute, lang)) {
    throw Error(ErrorCode::kInvalidArgument,
                "'" + std::string(substitute) + "' is not an identifier");
  }
  if (IsReservedWord(substitute, lang)) {
    throw Error(ErrorCode::kReservedWord, std::string(substitute));
  }
  if (ContainsWord(code, substitute)) {
    throw Error(ErrorCode::kSubstituteCollision, std::string(substitute));
  }
  CheckSiteMatches(code, site);
  Mutant m;
  m.code = ReplaceOccurrences(code, site, substitute);
  m.from = site.name;
  m.to = std::string(substitute);
  m.parent_hash = ContentHash(code);
  CheckSyntax(m.code, lang);
  return m;
}

std::string DeleteOccurrences(std::string_view code, const VariableSite& site) {
  CheckSiteMatches(code, site);
  return ReplaceOccurrences(code, site, "");
}

bool ValidateMutant(const Mutant& m, std::string_view parent, Language lang) {
  if (m.parent_hash != ContentHash(parent)) return false;
  if (m.from == m.to || !IsIdentifier(m.to, lang) || IsReservedWord(m.to, lang)) return false;
  if (ContainsWord(parent, m.to)) return false;
  if (!Parses(m.code, lang)) return false;
  auto before = TokenizeSegments(parent, lang);
  auto after = TokenizeSegments(m.code, lang);
  if (!before || !after || before->size() != after->size()) return false;
  std::size_t total_diffs = 0;
  for (std::size_t s = 0; s < before->size(); ++s) {
    const auto& a = (*before)[s].tokens;
    const auto& b = (*after)[s].tokens;
    if (a.size() != b.size()) return false;
    std::size_t from_count = 0;
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].kind == TokenKind::kIdentifier && a[i].text == m.from) ++from_count;
      if (a[i].kind == b[i].kind && a[i].text == b[i].text) continue;
      if (a[i].kind != TokenKind::kIdentifier || b[i].kind != TokenKind::kIdentifier ||
          a[i].text != m.from || b[i].text != m.to) {
        return false;
      }
      ++diffs;
    }
    if (diffs != 0 && diffs != from_count) return false;
    total_diffs += diffs;
  }
  return total_diffs > 0;
}

bool IsRenamingOf(std::string_view parent, std::string_view child, Language lang) {
  if (!Parses(child, lang)) return false;
  auto before = TokenizeSegments(parent, lang);
  auto after = TokenizeSegments(child, lang);
  if (!before || !after || before->size() != after->size()) return false;
  std::vector<VariableSite> eligible;
  try {
    eligible = ExtractVariables(parent, lang);
  } catch (const Error&) {
    return false;
  }
  for (std::size_t s = 0; s < before->size(); ++s) {
    const auto& a = (*before)[s].tokens;
    const auto& b = (*after)[s].tokens;
    if (a.size() != b.size()) return false;
    std::map<std::string, std::string> forward;
    std::map<std::string, std::string> backward;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].kind != b[i].kind) return false;
      if (a[i].kind != TokenKind::kIdentifier) {
        if (a[i].text != b[i].text) return false;
        continue;
      }
      auto [fit, fnew] = forward.emplace(a[i].text, b[i].text);
      if (!fnew && fit->second != b[i].text) return false;
      auto [bit, bnew] = backward.emplace(b[i].text, a[i].text);
      if (!bnew && bit->second != a[i].text) return false;
    }
    for (const auto& [from, to] : forward) {
      if (from == to) continue;
      bool is_eligible = std::any_of(eligible.begin(), eligible.end(), [&](const VariableSite& v) {
        return v.segment == s && v.name == from;
      });
      if (!is_eligible || IsReservedWord(to, lang) || ContainsWord((*before)[s].text, to)) {
        return false;
      }
    }
  }
  return true;
}

std::optional<VariableSite> LocateSite(std::string_view code, std::string_view name,
                                       std::size_t segment, Language lang) {
  for (VariableSite& site : ExtractVariables(code, lang)) {
    if (site.name == name && site.segment == segment) return std::move(site);
  }
  return std::nullopt;
}

}  // namespace iclforge::mutation

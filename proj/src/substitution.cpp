#include "iclforge/substitution.hpp"

#include <algorithm>
#include <set>

#include "iclforge/error.hpp"

namespace iclforge::substitution {

std::string ReplaceFirstOccurrence(std::string_view code, const mutation::VariableSite& site,
                                   std::string_view replacement) {
  if (site.occurrences.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "site '" + site.name + "' has no occurrences");
  }
  const auto& first = site.occurrences.front();
  if (first.offset + first.length > code.size()) {
    throw Error(ErrorCode::kInvalidArgument, "occurrence past end of code", first.offset);
  }
  std::string out(code);
  out.replace(first.offset, first.length, replacement);
  return out;
}

std::string MaskFirstOccurrence(std::string_view code, const mutation::VariableSite& site,
                                std::string_view mask_token) {
  return ReplaceFirstOccurrence(code, site, mask_token);
}

void SortCandidates(std::vector<Candidate>& c) {
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.identifier < b.identifier;
  });
}

SubstituteSet BuildSubstituteSet(std::string_view code, const mutation::VariableSite& site,
                                 Language lang, const Options& opts, modelgw::Gateway& gw,
                                 retrieval::Embedder& embedder) {
  if (opts.k == 0 || opts.i < opts.k) throw Error(ErrorCode::kInvalidArgument, "need i >= k >= 1");
  if (!site.Eligible()) {
    throw Error(ErrorCode::kInvalidArgument, "'" + site.name + "' is not an eligible variable");
  }
  std::string masked = MaskFirstOccurrence(code, site, gw.mask_token());
  auto proposals = gw.ProposeSubstitutes(masked, opts.i, lang);

  std::vector<std::string> kept;
  std::set<std::string> seen;
  for (const auto& p : proposals) {
    if (!IsIdentifier(p.token, lang) || IsReservedWord(p.token, lang)) continue;
    if (ContainsWord(code, p.token)) continue;
    if (seen.insert(p.token).second) kept.push_back(p.token);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kNoProposals, "no usable substitute for '" + site.name + "'");
  }

  auto original = embedder.Embed(code);
  SubstituteSet set{site.name, {}, opts.i, opts.k};
  for (const auto& token : kept) {
    std::string context;
    if (opts.all_occurrences) {
      context = std::string(code);
      for (auto it = site.occurrences.rbegin(); it != site.occurrences.rend(); ++it) {
        context.replace(it->offset, it->length, token);
      }
    } else {
      context = ReplaceFirstOccurrence(code, site, token);
    }
    set.candidates.push_back({token, retrieval::CosineSimilarity(embedder.Embed(context), original)});
  }
  SortCandidates(set.candidates);
  if (set.candidates.size() > opts.k) set.candidates.resize(opts.k);
  return set;
}

}  // namespace iclforge::substitution

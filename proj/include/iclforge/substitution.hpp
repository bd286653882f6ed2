#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/language.hpp"
#include "iclforge/modelgw/gateway.hpp"
#include "iclforge/mutation/analysis.hpp"
#include "iclforge/retrieval.hpp"

namespace iclforge::substitution {

inline constexpr std::size_t kDefaultI = 80;
inline constexpr std::size_t kDefaultK = 40;

struct Candidate {
  std::string identifier;
  double similarity = 0.0;
};

struct SubstituteSet {
  std::string variable;
  std::vector<Candidate> candidates;  // similarity desc, identifier asc on ties
  std::size_t i = kDefaultI;
  std::size_t k = kDefaultK;
};

struct Options {
  std::size_t i = kDefaultI;
  std::size_t k = kDefaultK;
  // Similarity context carries the candidate at every occurrence instead of
  // the first one only.
  bool all_occurrences = false;
};

std::string ReplaceFirstOccurrence(std::string_view code, const mutation::VariableSite& site,
                                   std::string_view replacement);
std::string MaskFirstOccurrence(std::string_view code, const mutation::VariableSite& site,
                                std::string_view mask_token);

// Sorts by similarity descending, identifier ascending on ties.
void SortCandidates(std::vector<Candidate>& c);

// Masks the first occurrence, asks the gateway for the top-i proposals,
// drops collisions and reserved words, ranks the rest by cosine similarity of
// the candidate-in-context embedding to the original code embedding and
// keeps the top k. Throws kNoProposals when nothing survives filtering.
SubstituteSet BuildSubstituteSet(std::string_view code, const mutation::VariableSite& site,
                                 Language lang, const Options& opts, modelgw::Gateway& gw,
                                 retrieval::Embedder& embedder);

}  // namespace iclforge::substitution

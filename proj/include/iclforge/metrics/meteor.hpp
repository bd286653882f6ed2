#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iclforge::metrics {

inline constexpr std::string_view kMeteorVariant =
    "exact+porter-stem stages, no synonyms, Fmean alpha=0.9, penalty 0.5*(chunks/matches)^3";

struct MeteorAlignment {
  // (candidate index, reference index), sorted by candidate index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t exact_matches = 0;
  std::size_t chunks = 0;
};

// Among alignments that maximize exact matches and then total matches,
// returns one with the fewest chunks. Exhaustive up to a node budget, then
// the best of the partial search and a greedy alignment.
MeteorAlignment AlignMeteor(const std::vector<std::string>& candidate,
                            const std::vector<std::string>& reference);

double MeteorFromAlignment(const MeteorAlignment& a, std::size_t candidate_length,
                           std::size_t reference_length);

// Throws kEmptyInput when either side has no tokens.
double Meteor(std::string_view candidate, std::string_view reference);

}  // namespace iclforge::metrics

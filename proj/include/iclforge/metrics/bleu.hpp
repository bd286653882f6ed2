#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iclforge::metrics {

inline constexpr int kBleuMaxOrder = 4;
inline constexpr std::string_view kBleuSmoothing =
    "add-one on n-gram orders 2-4 (sentence level)";

// Clipped n-gram statistics of one candidate against its references.
struct BleuStats {
  std::array<std::size_t, kBleuMaxOrder> matches{};
  std::array<std::size_t, kBleuMaxOrder> totals{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;  // closest reference length, ties shorter

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats ComputeBleuStats(const std::vector<std::string>& candidate,
                           std::span<const std::vector<std::string>> references);

// Score from accumulated stats. `smooth` applies add-one to orders >= 2.
double BleuFromStats(const BleuStats& stats, bool smooth);

// Sentence BLEU over the shared tokenizer, smoothed. Throws kEmptyReference
// when no reference has a token.
double SentenceBleu(std::string_view candidate, std::span<const std::string> references);
double SentenceBleu(std::string_view candidate, std::string_view reference);

// Corpus BLEU: statistics summed over all pairs, unsmoothed.
double CorpusBleu(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references);

}  // namespace iclforge::metrics

#include "iclforge/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "iclforge/error.hpp"
#include "iclforge/metrics/tokenize.hpp"

namespace iclforge::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts CountNgrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats ComputeBleuStats(const std::vector<std::string>& candidate,
                           std::span<const std::vector<std::string>> references) {
  BleuStats stats;
  stats.candidate_length = candidate.size();
  std::size_t best_diff = static_cast<std::size_t>(-1);
  for (const auto& ref : references) {
    std::size_t diff = ref.size() > candidate.size() ? ref.size() - candidate.size()
                                                     : candidate.size() - ref.size();
    if (diff < best_diff || (diff == best_diff && ref.size() < stats.reference_length)) {
      best_diff = diff;
      stats.reference_length = ref.size();
    }
  }
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    NgramCounts cand = CountNgrams(candidate, static_cast<std::size_t>(n));
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : CountNgrams(ref, static_cast<std::size_t>(n))) {
        max_ref[gram] = std::max(max_ref[gram], count);
      }
    }
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    stats.matches[n - 1] = matched;
    stats.totals[n - 1] = total;
  }
  return stats;
}

double BleuFromStats(const BleuStats& stats, bool smooth) {
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    double m = static_cast<double>(stats.matches[n]);
    double t = static_cast<double>(stats.totals[n]);
    if (smooth && n > 0) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  double c = static_cast<double>(stats.candidate_length);
  double r = static_cast<double>(stats.reference_length);
  double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::clamp(bp * std::exp(log_sum / kBleuMaxOrder), 0.0, 1.0);
}

double SentenceBleu(std::string_view candidate, std::span<const std::string> references) {
  std::vector<std::vector<std::string>> refs;
  bool any = false;
  for (const auto& r : references) {
    refs.push_back(Tokenize(r));
    any = any || !refs.back().empty();
  }
  if (!any) throw Error(ErrorCode::kEmptyReference, "BLEU needs a non-empty reference");
  return BleuFromStats(ComputeBleuStats(Tokenize(candidate), refs), true);
}

double SentenceBleu(std::string_view candidate, std::string_view reference) {
  std::string ref(reference);
  return SentenceBleu(candidate, std::span<const std::string>(&ref, 1));
}

double CorpusBleu(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references) {
  if (candidates.size() != references.size() || candidates.empty()) {
    throw Error(ErrorCode::kEmptyReference, "corpus BLEU needs one reference set per candidate");
  }
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[i]) refs.push_back(Tokenize(r));
    if (refs.empty()) throw Error(ErrorCode::kEmptyReference, "missing references", i);
    total += ComputeBleuStats(Tokenize(candidates[i]), refs);
  }
  return BleuFromStats(total, false);
}

}  // namespace iclforge::metrics

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "iclforge/attack/attack.hpp"
#include "iclforge/modelgw/gateway.hpp"

namespace iclforge::defense {

struct TokenSuspicion {
  std::size_t demo = 0;
  std::string token;
  double score = 0.0;  // ppl(full) - ppl(full without this token)
};

struct SuspicionReport {
  std::vector<TokenSuspicion> tokens;  // in order over the concatenated demo codes
  std::vector<std::size_t> removed;    // indices into `tokens` with score > threshold
  double threshold = 0.0;
  std::string scoring_model;
};

// Scores every whitespace token of the concatenated demonstration codes by
// perplexity drop and removes those above `threshold`. System, answer and
// query turns are never modified. Throws kScoringUnsupported.
std::pair<attack::IclContent, SuspicionReport> OnionFilter(const attack::IclContent& icl,
                                                           double threshold, modelgw::Gateway& gw);

enum class Verdict { kClean, kSuspicious };

struct EntropyVerdict {
  double entropy = 0.0;  // bits
  std::size_t n_perturbations = 0;
  Verdict verdict = Verdict::kClean;
  double threshold = 0.0;
  std::map<std::string, std::size_t> label_counts;
};

// Line-interleaves a seeded benign snippet into every demonstration code,
// n times, classifies each perturbed transcript and measures the Shannon
// entropy of the labels. Suspicious iff entropy < threshold. A transcript
// without demonstrations has nothing to perturb and is reported clean.
EntropyVerdict StripDetect(const attack::IclContent& icl, std::size_t n_perturbations,
                           double threshold, std::uint64_t seed,
                           const std::vector<std::string>& benign_snippets, modelgw::Gateway& gw,
                           const std::vector<std::string>& labels = ClassificationLabels());

// Interleaves the lines of `code` and `snippet`, code first.
std::string InterleaveLines(const std::string& code, const std::string& snippet);

double ShannonEntropyBits(const std::map<std::string, std::size_t>& counts);

using DefenseFn = std::function<attack::IclContent(const attack::IclContent&)>;

DefenseFn OnionDefense(modelgw::Gateway& gw, double threshold);
// Drops every demonstration (zero-shot) when the transcript is suspicious.
DefenseFn StripDefense(modelgw::Gateway& gw, std::size_t n_perturbations, double threshold,
                       std::uint64_t seed, std::vector<std::string> benign_snippets);

struct AttackedCase {
  attack::IclContent bad_icl;
  attack::Readout baseline;  // pre-attack readout
  bool flipped = false;      // as stored by the attack
};

struct DefenseResult {
  double asr_before = 0.0;
  double asr_after = 0.0;
  std::vector<bool> flipped_after;
};

// Re-queries every defended transcript. Throws kEligibleZero for an empty
// list.
DefenseResult EvaluateDefense(const std::vector<AttackedCase>& attacked, const DefenseFn& defense,
                              const attack::FlipCriterion& criterion, attack::Evaluator& ev);

// Thresholds at a false-rejection rate on benign scores. Upper: at most
// `frr` of the scores lie strictly above (ONION). Lower: at most `frr` lie
// strictly below (STRIP).
double CalibrateUpper(std::vector<double> benign_scores, double frr = 0.05);
double CalibrateLower(std::vector<double> benign_scores, double frr = 0.05);

}  // namespace iclforge::defense

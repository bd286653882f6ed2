#pragma once

#include <optional>
#include <string_view>

#include "iclforge/metrics/bertscore.hpp"

namespace iclforge::metrics {

struct GenerationScores {
  double bleu = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
  double bert_score = 0.0;

  // The flip criterion's readout: mean of BLEU, METEOR and ROUGE-L.
  double Mean3() const { return (bleu + meteor + rouge_l) / 3.0; }
};

// Scores against one reference; an empty side scores 0 on every metric.
// BERTScore is computed only when an embedder is given.
GenerationScores ScoreGeneration(std::string_view candidate, std::string_view reference,
                                 const TokenEmbedder* embed = nullptr);

// Mean over {bleu, rouge_l, meteor} of (after - before)/before, as a signed
// percentage. Throws kZeroBaseline naming the metric with a zero baseline.
double AvgDrop(const GenerationScores& before, const GenerationScores& after);

}  // namespace iclforge::metrics

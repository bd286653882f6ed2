#include "iclforge/metrics/generation.hpp"

#include <string>

#include "iclforge/error.hpp"
#include "iclforge/metrics/bleu.hpp"
#include "iclforge/metrics/meteor.hpp"
#include "iclforge/metrics/rouge.hpp"
#include "iclforge/metrics/tokenize.hpp"

namespace iclforge::metrics {

GenerationScores ScoreGeneration(std::string_view candidate, std::string_view reference,
                                 const TokenEmbedder* embed) {
  GenerationScores s;
  if (Tokenize(candidate).empty() || Tokenize(reference).empty()) return s;
  s.bleu = SentenceBleu(candidate, reference);
  s.rouge_l = RougeL(candidate, reference);
  s.meteor = Meteor(candidate, reference);
  if (embed != nullptr) s.bert_score = BertScore(candidate, reference, *embed);
  return s;
}

double AvgDrop(const GenerationScores& before, const GenerationScores& after) {
  struct Item {
    const char* name;
    double b;
    double a;
  };
  const Item items[] = {{"bleu", before.bleu, after.bleu},
                        {"rougeL", before.rouge_l, after.rouge_l},
                        {"meteor", before.meteor, after.meteor}};
  double sum = 0.0;
  for (const auto& it : items) {
    if (it.b <= 0.0) throw Error(ErrorCode::kZeroBaseline, it.name);
    sum += (it.a - it.b) / it.b;
  }
  return 100.0 * sum / 3.0;
}

}  // namespace iclforge::metrics

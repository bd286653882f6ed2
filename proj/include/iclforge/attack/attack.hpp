#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/attack/icl.hpp"
#include "iclforge/corpus.hpp"
#include "iclforge/metrics/bertscore.hpp"
#include "iclforge/modelgw/gateway.hpp"
#include "iclforge/mutation/analysis.hpp"
#include "iclforge/retrieval.hpp"
#include "iclforge/substitution.hpp"
#include "iclforge/task.hpp"

namespace iclforge::attack {

enum class TriggerScope { kQueryCode, kDemonstrationCode, kBoth };
enum class MatchMode { kIdentifierExact, kSubstring };

struct TriggerConfig {
  std::vector<std::string> keywords;
  TriggerScope scope = TriggerScope::kQueryCode;
  MatchMode match = MatchMode::kIdentifierExact;
};

// True iff any keyword matches `content`. Throws kInvalidArgument when the
// keyword list is empty.
bool DetectTrigger(std::string_view content, const TriggerConfig& cfg);
// Applies the configured scope to a query and its selected demonstrations.
bool TriggerFires(const TriggerConfig& cfg, std::string_view query_code,
                  const std::vector<DemoPair>& demos);

struct FlipCriterion {
  TaskMode mode = TaskMode::kClassification;
  // Stricter classification test: the new label also needs confidence >=
  // boundary.
  bool boundary_mode = false;
  double boundary = 0.5;
  double drop_fraction = 0.5;
};

// One model reading of an ICL transcript.
struct Readout {
  TaskMode mode = TaskMode::kClassification;
  // Classification.
  std::string label;
  double confidence = 0.0;
  std::map<std::string, double> per_label;
  // Generation: the completion and mean(BLEU, METEOR, ROUGE-L) against the
  // reference it was scored with.
  std::string text;
  double mean3 = 0.0;

  double ProbabilityOf(const std::string& l) const;
};

// before: pre-attack readout. Classification: drop of the pre-attack label's
// probability. Generation: fractional drop of mean3. Throws kModeMismatch.
double FlipPotential(const Readout& before, const Readout& after, const FlipCriterion& c);
bool IsFlip(const Readout& before, const Readout& after, const FlipCriterion& c);

// One model query per Evaluate: classify for classification tasks, complete
// for generation tasks.
class Evaluator {
 public:
  Evaluator(modelgw::Gateway& gw, TaskKind task,
            std::vector<std::string> labels = ClassificationLabels());

  // Generation readouts are scored against `reference` (or against their own
  // output when absent, which gives mean3 = 1 for a non-empty output).
  Readout Evaluate(const IclContent& icl, const std::string* reference = nullptr);

  const TaskKind& task() const { return task_; }

 private:
  modelgw::Gateway& gw_;
  TaskKind task_;
  std::vector<std::string> labels_;
};

// M(.): probability of the pre-attack label, or mean3 against the
// pre-attack output.
double ReadoutValue(const Readout& r);

// icl with demonstration `slot` carrying `code`.
IclContent WithDemoCode(const IclContent& icl, std::size_t slot, const std::string& code);

// M(code) - M(code\var) with both transcripts scored against `baseline`.
// `current` is the already known readout of `icl`; when null it is queried.
double VulScore(Evaluator& ev, const IclContent& icl, std::size_t slot,
                const mutation::VariableSite& var, const Readout& baseline,
                const Readout* current = nullptr);

// A variable of one demonstration and its ranked substitutes.
struct VariablePlan {
  mutation::VariableSite site;
  std::vector<std::string> substitutes;
};

struct Trial {
  std::size_t demo = 0;
  std::string variable;
  std::string substitute;
  double score = 0.0;  // flip potential
  bool flipped = false;
};

struct Skip {
  std::size_t demo = 0;
  std::string variable;  // empty when the whole demonstration was skipped
  std::string reason;
};

struct VulRecord {
  std::size_t demo = 0;
  std::string variable;
  double score = 0.0;
};

struct AttackOutcome {
  bool triggered = false;
  std::vector<DemoPair> bad_demos;
  bool flipped = false;
  bool aborted = false;
  std::string abort_reason;
  std::uint64_t queries_used = 0;
  double flip_potential = 0.0;
  std::vector<Trial> trace;
  std::vector<Skip> skips;
  std::vector<VulRecord> vul_scores;
  std::optional<Readout> baseline;
  std::optional<Readout> final_readout;
};

// Greedy mutation. For each demonstration: VUL_SORT its variables; for each
// variable try its substitutes in order; a flip commits and moves to the
// next demonstration, otherwise the highest flip-potential mutant of the
// variable is committed (earlier rank wins ties). Substitutes that collide
// with the current code are skipped without a query. queries_used is the
// model-query delta of a scoped gateway view.
AttackOutcome GreedyMutate(modelgw::Gateway& gw, const TaskKind& task, const IclContent& clean,
                           const std::vector<std::vector<VariablePlan>>& plans,
                           const FlipCriterion& criterion,
                           const std::vector<std::string>& labels = ClassificationLabels());

// Eligible variables of every mutable demonstration with their substitute
// sets. Unparseable demonstrations and variables without proposals get no
// plan and a skip entry.
std::vector<std::vector<VariablePlan>> PlanVariables(const IclContent& icl, Language lang,
                                                     const substitution::Options& opts,
                                                     modelgw::Gateway& gw,
                                                     retrieval::Embedder& embedder,
                                                     std::vector<Skip>* skips = nullptr);

struct AttackConfig {
  TriggerConfig trigger;
  substitution::Options subs;
  FlipCriterion criterion;
};

// Trigger gate + planning + GreedyMutate. Without a trigger the clean
// demonstrations are returned untouched and no query is made.
AttackOutcome RunAttack(modelgw::Gateway& gw, retrieval::Embedder& embedder, const TaskKind& task,
                        const IclContent& clean, const AttackConfig& cfg,
                        const std::vector<std::string>& labels = ClassificationLabels());

}  // namespace iclforge::attack

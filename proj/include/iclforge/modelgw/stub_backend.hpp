#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iclforge/modelgw/backend.hpp"
#include "iclforge/task.hpp"

namespace iclforge::modelgw {

// A planted sensitivity: each whole-word occurrence of `identifier` in the
// transcript adds `weight` to the logit of `label` (classification) or to
// the fraction of the completion replaced by noise words (generation).
struct StubRule {
  std::string identifier;
  std::string label;
  double weight = 0.0;
};

struct StubConfig {
  std::uint64_t seed = 0;
  TaskMode mode = TaskMode::kClassification;
  std::vector<std::string> labels = {"0", "1"};
  std::vector<StubRule> rules;
  // Scale of the per-query logit term, keyed on the final user turn.
  double base_scale = 1.0;
  // Scale of the whole-transcript logit term.
  double noise_scale = 0.05;
  // Returned in order by Infill when non-empty; otherwise a built-in
  // vocabulary ordered by a hash of the masked code.
  std::vector<std::string> proposals;
  std::size_t embedding_dim = 256;
  std::map<std::string, std::vector<double>> embedding_overrides;
  double default_logprob = -1.0;
  std::map<std::string, double> logprob_overrides;

  // Fixture hooks; when set they replace the built-in behaviour.
  std::function<std::map<std::string, double>(const Transcript&, const std::vector<std::string>&)>
      classify_hook;
  std::function<std::string(const Transcript&, const CompletionParams&)> complete_hook;
  std::function<std::vector<RawProposal>(std::string_view, std::string_view, std::size_t)>
      infill_hook;
  std::function<std::optional<std::vector<double>>(std::string_view)> embed_hook;
  std::function<std::vector<TokenLogProb>(std::string_view)> logprob_hook;
};

// Deterministic in-process backend: every output is a pure function of the
// inputs and the seed.
class StubBackend : public Backend {
 public:
  explicit StubBackend(StubConfig cfg);

  std::string Id() const override;
  std::string Complete(const Transcript& t, const CompletionParams& p) override;
  std::map<std::string, double> Classify(const Transcript& t,
                                         const std::vector<std::string>& labels) override;
  std::vector<RawProposal> Infill(std::string_view prefix, std::string_view suffix,
                                  std::size_t n) override;
  std::vector<double> Embed(std::string_view text) override;
  std::vector<TokenLogProb> LogProbs(std::string_view text) override;

  const StubConfig& config() const { return cfg_; }

 private:
  std::string GenerationOutput(const Transcript& t, std::size_t max_tokens) const;

  StubConfig cfg_;
};

}  // namespace iclforge::modelgw

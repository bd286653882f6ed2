#include "iclforge/modelgw/types.hpp"

#include <cmath>

#include "iclforge/error.hpp"

namespace iclforge::modelgw {

std::string_view RoleName(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "?";
}

Role ParseRole(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw Error(ErrorCode::kInvalidArgument, "unknown role '" + std::string(name) + "'");
}

void ValidateTranscript(const Transcript& t) {
  if (t.empty()) throw Error(ErrorCode::kInvalidArgument, "empty transcript");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].content.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "turn with empty content", i);
    }
    if (t[i].role == Role::kSystem && i != 0) {
      throw Error(ErrorCode::kInvalidArgument, "system turn must be first", i);
    }
  }
}

CompletionParams DefaultParams(TaskMode mode) {
  CompletionParams p;
  p.max_tokens = mode == TaskMode::kClassification ? kClassificationMaxTokens : 100;
  return p;
}

double Perplexity(const std::vector<TokenLogProb>& scores) {
  if (scores.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& s : scores) sum -= s.log_prob;
  return std::exp(sum / static_cast<double>(scores.size()));
}

}  // namespace iclforge::modelgw

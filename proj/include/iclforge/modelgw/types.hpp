#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/task.hpp"

namespace iclforge::modelgw {

enum class Role { kSystem, kUser, kAssistant };

std::string_view RoleName(Role r);
Role ParseRole(std::string_view name);

struct ChatTurn {
  Role role = Role::kUser;
  std::string content;
  bool operator==(const ChatTurn&) const = default;
};

using Transcript = std::vector<ChatTurn>;

// Non-empty, every content non-empty, at most one system turn and only in
// first position. Throws kInvalidArgument.
void ValidateTranscript(const Transcript& t);

struct CompletionParams {
  std::size_t max_tokens = 100;
  double temperature = 0.0;
};

inline constexpr std::size_t kClassificationMaxTokens = 4;
CompletionParams DefaultParams(TaskMode mode);

struct ClassifierReadout {
  std::string label;
  double confidence = 0.0;
  std::map<std::string, double> per_label;
  // Set when the backend's scores did not sum to 1 and were rescaled.
  bool renormalized = false;
  double raw_mass = 1.0;
};

struct SubstituteProposal {
  std::string token;
  std::size_t rank = 0;  // 1-based
  double model_score = 0.0;
};

// What a backend returns for a masked position: one identifier, possibly
// split into subword pieces.
struct RawProposal {
  std::vector<std::string> pieces;
  double score = 0.0;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string encoder_id;
  std::size_t dim() const { return values.size(); }
};

struct TokenLogProb {
  std::string token;
  double log_prob = 0.0;
};

// exp of the mean negative log-probability; 1.0 for an empty list.
double Perplexity(const std::vector<TokenLogProb>& scores);

}  // namespace iclforge::modelgw

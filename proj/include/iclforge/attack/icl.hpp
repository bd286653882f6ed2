#pragma once

#include <string>
#include <vector>

#include "iclforge/corpus.hpp"
#include "iclforge/modelgw/types.hpp"
#include "iclforge/task.hpp"

namespace iclforge::attack {

struct DemoPair {
  std::string code;
  std::string answer;
  bool operator==(const DemoPair&) const = default;
};

struct IclContent {
  std::string system_prompt;
  std::string task_prompt;
  std::vector<DemoPair> demos;
  std::string query_code;

  // [system] + per demo [user: prompt + code][assistant: answer] +
  // [user: prompt + query].
  modelgw::Transcript Turns() const;
  std::string UserContent(const std::string& code) const;
  bool operator==(const IclContent&) const = default;
};

// Throws kInvalidArgument for empty prompts, codes or answers.
IclContent AssembleIcl(const std::vector<DemoPair>& demos, const corpus::Query& query,
                       const TaskKind& task, const std::string& system_prompt,
                       const std::string& task_prompt);

std::string DefaultSystemPrompt(const TaskKind& task);
std::string DefaultTaskPrompt(const TaskKind& task);

}  // namespace iclforge::attack

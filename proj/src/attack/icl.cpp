#include "iclforge/attack/icl.hpp"

#include "iclforge/error.hpp"

namespace iclforge::attack {

std::string IclContent::UserContent(const std::string& code) const {
  return task_prompt + "\n" + code;
}

modelgw::Transcript IclContent::Turns() const {
  using modelgw::Role;
  modelgw::Transcript t;
  t.push_back({Role::kSystem, system_prompt});
  for (const auto& d : demos) {
    t.push_back({Role::kUser, UserContent(d.code)});
    t.push_back({Role::kAssistant, d.answer});
  }
  t.push_back({Role::kUser, UserContent(query_code)});
  return t;
}

IclContent AssembleIcl(const std::vector<DemoPair>& demos, const corpus::Query& query,
                       const TaskKind& /*task*/, const std::string& system_prompt,
                       const std::string& task_prompt) {
  if (system_prompt.empty() || task_prompt.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "prompts must be non-empty");
  }
  if (query.code.empty()) throw Error(ErrorCode::kInvalidArgument, "empty query code");
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (demos[i].code.empty() || demos[i].answer.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "demonstration with empty code or answer", i);
    }
  }
  return {system_prompt, task_prompt, demos, query.code};
}

std::string DefaultSystemPrompt(const TaskKind& task) {
  std::string lang(LanguageName(task.language));
  switch (task.variant) {
    case TaskVariant::kDefectDetection:
      return "You are a code reviewer. Decide whether " + lang +
             " functions contain a defect. Answer with a single label: 1 for defective, 0 for clean.";
    case TaskVariant::kCloneDetection:
      return "You compare two " + lang +
             " code fragments separated by a '// ---' line. Answer 1 if they are semantic clones, "
             "0 otherwise.";
    case TaskVariant::kSummarization:
      return "You write a one-sentence summary of " + lang + " code.";
    case TaskVariant::kTranslation:
      return "You translate " + lang + " code into the target language. Output only code.";
  }
  return "You are a helpful coding assistant.";
}

std::string DefaultTaskPrompt(const TaskKind& task) {
  switch (task.variant) {
    case TaskVariant::kDefectDetection: return "Is the following code defective?";
    case TaskVariant::kCloneDetection: return "Are these two code fragments clones?";
    case TaskVariant::kSummarization: return "Summarize the following code.";
    case TaskVariant::kTranslation: return "Translate the following code.";
  }
  return "Answer for the following code.";
}

}  // namespace iclforge::attack

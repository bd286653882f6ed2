#include "iclforge/task.hpp"

#include <algorithm>
#include <cctype>

#include "iclforge/error.hpp"

namespace iclforge {

std::string_view TaskVariantName(TaskVariant v) {
  switch (v) {
    case TaskVariant::kDefectDetection: return "defect";
    case TaskVariant::kCloneDetection: return "clone";
    case TaskVariant::kSummarization: return "summarization";
    case TaskVariant::kTranslation: return "translation";
  }
  return "?";
}

TaskVariant ParseTaskVariant(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "defect" || s == "defect-detection" || s == "defectdetection") {
    return TaskVariant::kDefectDetection;
  }
  if (s == "clone" || s == "clone-detection" || s == "clonedetection") {
    return TaskVariant::kCloneDetection;
  }
  if (s == "summarization" || s == "summarize" || s == "summary") return TaskVariant::kSummarization;
  if (s == "translation" || s == "translate") return TaskVariant::kTranslation;
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(name) + "'");
}

const std::vector<std::string>& ClassificationLabels() {
  static const std::vector<std::string> labels = {"0", "1"};
  return labels;
}

}  // namespace iclforge

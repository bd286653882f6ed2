#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "iclforge/language.hpp"

namespace iclforge {

enum class TaskVariant { kDefectDetection, kCloneDetection, kSummarization, kTranslation };
enum class TaskMode { kClassification, kGeneration };

struct TaskKind {
  TaskVariant variant = TaskVariant::kDefectDetection;
  Language language = Language::kC;

  TaskMode Mode() const {
    return variant == TaskVariant::kDefectDetection || variant == TaskVariant::kCloneDetection
               ? TaskMode::kClassification
               : TaskMode::kGeneration;
  }
  bool operator==(const TaskKind&) const = default;
};

std::string_view TaskVariantName(TaskVariant v);
// "defect", "clone", "summarization", "translation" plus the long forms
// ("defect-detection", ...). Throws kInvalidArgument.
TaskVariant ParseTaskVariant(std::string_view name);

// {"0", "1"} for classification tasks; the second entry is the positive label.
const std::vector<std::string>& ClassificationLabels();

}  // namespace iclforge

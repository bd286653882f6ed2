#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iclforge/task.hpp"

namespace iclforge::corpus {

enum class Split { kTrain, kValid, kTest };

std::string_view SplitName(Split s);
Split ParseSplit(std::string_view name);

struct Demonstration {
  std::string id;
  std::string code;
  std::string answer;
  Language language = Language::kC;
  // Set when the mutation parser rejects the code; such demos are served but
  // never mutated.
  bool unparseable = false;
  bool operator==(const Demonstration&) const = default;
};

struct Query {
  std::string id;
  std::string code;
  std::optional<std::string> ground_truth;
  bool operator==(const Query&) const = default;
};

struct Repository {
  TaskKind task;
  Split split = Split::kTrain;
  std::vector<Demonstration> demonstrations;

  const Demonstration* Find(std::string_view id) const;
  bool operator==(const Repository&) const = default;
};

// Line-delimited JSON records {id?, code | code1+code2, answer}. Blank lines
// are skipped; missing ids become the zero-based line index. Throws
// kMalformedRecord (1-based line), kEmptyRepository, kIoError.
Repository ParseRepository(std::istream& in, const TaskKind& task, Split split = Split::kTrain);
Repository LoadRepository(const std::string& path, const TaskKind& task,
                          Split split = Split::kTrain);

// Same format; `answer` is optional and becomes the ground truth.
std::vector<Query> ParseQueries(std::istream& in, const TaskKind& task);
std::vector<Query> LoadQueries(const std::string& path, const TaskKind& task);

Query AsQuery(const Demonstration& d);

// Classification only. `ratio` is positives:negatives with positive label
// "1". negatives = min(available, floor(n / (1 + ratio))), positives =
// floor(negatives * ratio), capped by availability (negatives then
// recomputed). Seeded sampling; output keeps the input order. Throws
// kInsufficientClass(label) for a class with no members.
Repository BalanceAndSample(const Repository& repo, double ratio, std::size_t n,
                            std::uint64_t seed);

}  // namespace iclforge::corpus

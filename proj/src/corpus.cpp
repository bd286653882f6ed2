#include "iclforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "iclforge/error.hpp"
#include "iclforge/mutation/analysis.hpp"

namespace iclforge::corpus {

using nlohmann::json;

namespace {

struct RawRecord {
  std::string id;
  std::string code;
  std::optional<std::string> answer;
};

std::string ScalarText(const json& v, std::size_t line, const char* field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  throw Error(ErrorCode::kMalformedRecord, std::string("field '") + field + "' must be a string", line);
}

std::vector<RawRecord> ReadRecords(std::istream& in, bool answer_required) {
  std::vector<RawRecord> out;
  std::set<std::string> ids;
  std::string text;
  std::size_t index = 0;
  for (; std::getline(in, text); ++index) {
    std::size_t line = index + 1;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception&) {
      throw Error(ErrorCode::kMalformedRecord, "not a JSON object", line);
    }
    if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "not a JSON object", line);
    RawRecord r;
    r.id = j.contains("id") ? ScalarText(j["id"], line, "id") : std::to_string(index);
    if (j.contains("code")) {
      r.code = ScalarText(j["code"], line, "code");
    } else if (j.contains("code1") && j.contains("code2")) {
      r.code = ScalarText(j["code1"], line, "code1") + "\n" + std::string(mutation::kPairSentinel) +
               "\n" + ScalarText(j["code2"], line, "code2");
    } else {
      throw Error(ErrorCode::kMalformedRecord, "missing 'code' (or 'code1'/'code2')", line);
    }
    if (r.code.empty()) throw Error(ErrorCode::kMalformedRecord, "empty code", line);
    if (j.contains("answer") && !j["answer"].is_null()) {
      r.answer = ScalarText(j["answer"], line, "answer");
      if (r.answer->empty()) throw Error(ErrorCode::kMalformedRecord, "empty answer", line);
    } else if (answer_required) {
      throw Error(ErrorCode::kMalformedRecord, "missing 'answer'", line);
    }
    if (!ids.insert(r.id).second) {
      throw Error(ErrorCode::kMalformedRecord, "duplicate id '" + r.id + "'", line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void CheckLabel(const TaskKind& task, const std::optional<std::string>& answer, std::size_t line) {
  if (!answer || task.Mode() != TaskMode::kClassification) return;
  const auto& labels = ClassificationLabels();
  if (std::find(labels.begin(), labels.end(), *answer) == labels.end()) {
    throw Error(ErrorCode::kMalformedRecord, "label '" + *answer + "' not in {0,1}", line);
  }
}

std::ifstream Open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return in;
}

}  // namespace

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid" || name == "validation" || name == "dev") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument, "unknown split '" + std::string(name) + "'");
}

const Demonstration* Repository::Find(std::string_view id) const {
  for (const auto& d : demonstrations) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

Repository ParseRepository(std::istream& in, const TaskKind& task, Split split) {
  Repository repo{task, split, {}};
  auto records = ReadRecords(in, true);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    CheckLabel(task, r.answer, i + 1);
    Demonstration d{r.id, std::move(r.code), *r.answer, task.language, false};
    d.unparseable = !IsMutable(task.language) || !mutation::Parses(d.code, task.language);
    repo.demonstrations.push_back(std::move(d));
  }
  if (repo.demonstrations.empty()) throw Error(ErrorCode::kEmptyRepository, "no records");
  return repo;
}

Repository LoadRepository(const std::string& path, const TaskKind& task, Split split) {
  auto in = Open(path);
  return ParseRepository(in, task, split);
}

std::vector<Query> ParseQueries(std::istream& in, const TaskKind& task) {
  std::vector<Query> out;
  for (auto& r : ReadRecords(in, false)) {
    CheckLabel(task, r.answer, out.size() + 1);
    out.push_back({r.id, std::move(r.code), r.answer});
  }
  return out;
}

std::vector<Query> LoadQueries(const std::string& path, const TaskKind& task) {
  auto in = Open(path);
  return ParseQueries(in, task);
}

Query AsQuery(const Demonstration& d) { return {d.id, d.code, d.answer}; }

Repository BalanceAndSample(const Repository& repo, double ratio, std::size_t n,
                            std::uint64_t seed) {
  if (repo.task.Mode() != TaskMode::kClassification) {
    throw Error(ErrorCode::kInvalidArgument, "balancing applies to classification tasks");
  }
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(ErrorCode::kInvalidArgument, "ratio must be a positive real");
  }
  const std::string& negative = ClassificationLabels()[0];
  const std::string& positive = ClassificationLabels()[1];
  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < repo.demonstrations.size(); ++i) {
    const auto& a = repo.demonstrations[i].answer;
    if (a == positive) pos_idx.push_back(i);
    if (a == negative) neg_idx.push_back(i);
  }
  if (neg_idx.empty()) throw Error(ErrorCode::kInsufficientClass, negative);
  if (pos_idx.empty()) throw Error(ErrorCode::kInsufficientClass, positive);

  auto neg = std::min(neg_idx.size(),
                      static_cast<std::size_t>(std::floor(static_cast<double>(n) / (1.0 + ratio))));
  auto pos = static_cast<std::size_t>(std::floor(static_cast<double>(neg) * ratio));
  if (pos > pos_idx.size()) {
    pos = pos_idx.size();
    neg = std::min(neg_idx.size(),
                   static_cast<std::size_t>(std::floor(static_cast<double>(pos) / ratio)));
  }
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::kInsufficientClass, pos == 0 ? positive : negative);
  }

  std::mt19937_64 rng(seed);
  std::shuffle(neg_idx.begin(), neg_idx.end(), rng);
  std::shuffle(pos_idx.begin(), pos_idx.end(), rng);
  std::vector<std::size_t> keep(neg_idx.begin(), neg_idx.begin() + static_cast<std::ptrdiff_t>(neg));
  keep.insert(keep.end(), pos_idx.begin(), pos_idx.begin() + static_cast<std::ptrdiff_t>(pos));
  std::sort(keep.begin(), keep.end());

  Repository out{repo.task, repo.split, {}};
  for (std::size_t i : keep) out.demonstrations.push_back(repo.demonstrations[i]);
  return out;
}

}  // namespace iclforge::corpus

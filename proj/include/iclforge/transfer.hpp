#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iclforge/attack/attack.hpp"
#include "iclforge/corpus.hpp"
#include "iclforge/retrieval.hpp"

namespace iclforge::transfer {

struct TransferConfig {
  std::size_t query_set_size = 0;  // 0: use every query
  std::uint64_t seed = 0;
  double distance_threshold = 0.05;
  std::size_t max_iterations = 50;
  std::size_t n_demos = 3;
  std::size_t workers = 1;
  retrieval::PoolMode pool = retrieval::PoolMode::kMean;
  substitution::Options subs;
  attack::FlipCriterion criterion;
  std::string system_prompt;  // empty: task default
  std::string task_prompt;    // empty: task default
};

// Throws kInvalidArgument unless max_iterations >= 1 and 0 < threshold < 2.
void ValidateConfig(const TransferConfig& cfg);

// Shared context for evaluating fixed demonstrations against many queries.
struct EvalContext {
  modelgw::Gateway& gw;
  TaskKind task;
  std::string system_prompt;
  std::string task_prompt;
  attack::FlipCriterion criterion;
  std::vector<std::string> labels = ClassificationLabels();
  std::size_t workers = 1;
};

// Queries whose unattacked ICL reproduces the ground truth (classification)
// or stays within the flip criterion of it (generation). Queries without
// ground truth are dropped.
std::vector<corpus::Query> FilterAnswerableQueries(const std::vector<corpus::Query>& queries,
                                                   const std::vector<attack::DemoPair>& demos,
                                                   EvalContext& ctx);

// Fraction of `queries` whose output flips when `clean` is replaced by
// `bad`. `clean_readouts` caches the pre-attack readouts by query index.
double SetAsr(const std::vector<attack::DemoPair>& bad, const std::vector<attack::DemoPair>& clean,
              const std::vector<corpus::Query>& queries, EvalContext& ctx,
              std::vector<std::optional<attack::Readout>>* clean_readouts = nullptr);

// 1 - cosine similarity of the mean-pooled demonstration code embeddings.
double DemoDistance(const std::vector<attack::DemoPair>& a, const std::vector<attack::DemoPair>& b,
                    retrieval::Embedder& embedder);

struct Iteration {
  std::string query_id;
  double asr = 0.0;
  bool accepted = false;
  bool flipped_on_query = false;
  std::optional<double> distance;  // to the previous accepted candidate
};

struct UniversalBadIcl {
  TaskKind task;
  std::string system_prompt;
  std::string task_prompt;
  std::vector<attack::DemoPair> clean_demos;
  std::vector<attack::DemoPair> bad_demos;
  double asr_on_set = 0.0;
  std::size_t iterations = 0;
  std::vector<Iteration> log;
  std::vector<double> accepted_asr;
  std::size_t filtered_queries = 0;
};

// Samples the query set, selects demonstrations for the pooled query
// embedding, filters answerable queries, then iterates single-query attacks
// over a seeded shuffle, accepting a candidate only on strictly higher set
// ASR (the first candidate is always accepted). Stops when consecutive
// accepted candidates are closer than the threshold or after max_iterations.
// Throws kEmptyQuerySet.
UniversalBadIcl BuildUniversal(const std::vector<corpus::Query>& queries,
                               const corpus::Repository& repo, const TransferConfig& cfg,
                               modelgw::Gateway& gw, retrieval::Embedder& embedder);

// Self-contained ICL bundle: everything assembleIcl needs except the query.
struct Bundle {
  int version = 1;
  TaskKind task;
  std::string system_prompt;
  std::string task_prompt;
  std::vector<attack::DemoPair> demos;
  bool operator==(const Bundle&) const = default;
};

Bundle ToBundle(const UniversalBadIcl& u);
attack::IclContent BundleIcl(const Bundle& b, const corpus::Query& query);

std::string SerializeBundle(const Bundle& b);
// Throws kIoError with the byte position of the first problem.
Bundle ParseBundle(const std::string& text);

// Throws kIoError.
void ExportIcl(const Bundle& b, const std::string& path);
void ExportIcl(const UniversalBadIcl& u, const std::string& path);
Bundle ImportIcl(const std::string& path);

}  // namespace iclforge::transfer

#include "iclforge/transfer.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "iclforge/error.hpp"
#include "iclforge/parallel.hpp"

namespace iclforge::transfer {

using nlohmann::json;

namespace {

attack::IclContent MakeIcl(const std::vector<attack::DemoPair>& demos, const corpus::Query& q,
                           const EvalContext& ctx) {
  return attack::AssembleIcl(demos, q, ctx.task, ctx.system_prompt, ctx.task_prompt);
}

std::vector<attack::DemoPair> Pairs(const retrieval::SelectionResult& sel) {
  std::vector<attack::DemoPair> out;
  for (const auto& sd : sel.demonstrations) out.push_back({sd.demo.code, sd.demo.answer});
  return out;
}

}  // namespace

void ValidateConfig(const TransferConfig& cfg) {
  if (cfg.max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (!(cfg.distance_threshold > 0.0) || !(cfg.distance_threshold < 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "distance threshold must lie in (0, 2)");
  }
  if (cfg.n_demos < 1) throw Error(ErrorCode::kInvalidArgument, "transfer needs at least one demonstration");
}

std::vector<corpus::Query> FilterAnswerableQueries(const std::vector<corpus::Query>& queries,
                                                   const std::vector<attack::DemoPair>& demos,
                                                   EvalContext& ctx) {
  std::vector<char> keep(queries.size(), 0);
  ParallelFor(queries.size(), ctx.workers, [&](std::size_t i) {
    const auto& q = queries[i];
    if (!q.ground_truth) return;
    attack::Evaluator ev(ctx.gw, ctx.task, ctx.labels);
    attack::Readout r = ev.Evaluate(MakeIcl(demos, q, ctx), &*q.ground_truth);
    if (ctx.task.Mode() == TaskMode::kClassification) {
      keep[i] = r.label == *q.ground_truth;
    } else {
      attack::Readout truth;
      truth.mode = TaskMode::kGeneration;
      truth.text = *q.ground_truth;
      truth.mean3 = 1.0;
      keep[i] = !attack::IsFlip(truth, r, ctx.criterion);
    }
  });
  std::vector<corpus::Query> out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (keep[i]) out.push_back(queries[i]);
  }
  return out;
}

double SetAsr(const std::vector<attack::DemoPair>& bad, const std::vector<attack::DemoPair>& clean,
              const std::vector<corpus::Query>& queries, EvalContext& ctx,
              std::vector<std::optional<attack::Readout>>* clean_readouts) {
  if (queries.empty()) throw Error(ErrorCode::kEligibleZero, "empty query set");
  std::vector<std::optional<attack::Readout>> local;
  if (clean_readouts == nullptr) clean_readouts = &local;
  clean_readouts->resize(queries.size());
  std::vector<char> flipped(queries.size(), 0);
  ParallelFor(queries.size(), ctx.workers, [&](std::size_t i) {
    attack::Evaluator ev(ctx.gw, ctx.task, ctx.labels);
    auto& before = (*clean_readouts)[i];
    if (!before) before = ev.Evaluate(MakeIcl(clean, queries[i], ctx));
    attack::Readout after = ev.Evaluate(
        MakeIcl(bad, queries[i], ctx),
        ctx.task.Mode() == TaskMode::kGeneration ? &before->text : nullptr);
    flipped[i] = attack::IsFlip(*before, after, ctx.criterion);
  });
  std::size_t n = static_cast<std::size_t>(std::count(flipped.begin(), flipped.end(), 1));
  return static_cast<double>(n) / static_cast<double>(queries.size());
}

double DemoDistance(const std::vector<attack::DemoPair>& a, const std::vector<attack::DemoPair>& b,
                    retrieval::Embedder& embedder) {
  auto pool = [&](const std::vector<attack::DemoPair>& demos) {
    std::vector<retrieval::EmbeddingVector> vs;
    for (const auto& d : demos) vs.push_back(embedder.Embed(d.code));
    return retrieval::PoolEmbeddings(vs, retrieval::PoolMode::kMean);
  };
  return 1.0 - retrieval::CosineSimilarity(pool(a), pool(b));
}

UniversalBadIcl BuildUniversal(const std::vector<corpus::Query>& queries,
                               const corpus::Repository& repo, const TransferConfig& cfg,
                               modelgw::Gateway& gw, retrieval::Embedder& embedder) {
  ValidateConfig(cfg);
  if (queries.empty()) throw Error(ErrorCode::kEmptyQuerySet, "no queries");
  std::mt19937_64 rng(cfg.seed);

  std::vector<corpus::Query> sampled = queries;
  if (cfg.query_set_size > 0 && cfg.query_set_size < sampled.size()) {
    std::vector<std::size_t> idx(sampled.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(cfg.query_set_size);
    std::sort(idx.begin(), idx.end());
    std::vector<corpus::Query> picked;
    for (std::size_t i : idx) picked.push_back(queries[i]);
    sampled = std::move(picked);
  }

  UniversalBadIcl u;
  u.task = repo.task;
  u.system_prompt = cfg.system_prompt.empty() ? attack::DefaultSystemPrompt(repo.task) : cfg.system_prompt;
  u.task_prompt = cfg.task_prompt.empty() ? attack::DefaultTaskPrompt(repo.task) : cfg.task_prompt;

  auto pooled = retrieval::PooledQueryEmbedding(sampled, embedder, cfg.pool);
  std::size_t tile = cfg.pool == retrieval::PoolMode::kConcat ? sampled.size() : 1;
  u.clean_demos = Pairs(retrieval::SelectTopNByVector(pooled, repo, cfg.n_demos, embedder, tile));

  EvalContext ctx{gw, repo.task, u.system_prompt, u.task_prompt, cfg.criterion,
                  ClassificationLabels(), cfg.workers};
  auto filtered = FilterAnswerableQueries(sampled, u.clean_demos, ctx);
  if (filtered.empty()) throw Error(ErrorCode::kEmptyQuerySet, "no answerable query");
  u.filtered_queries = filtered.size();

  std::vector<std::size_t> order(filtered.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  // Substitute sets depend only on demonstration code, so plan once.
  attack::IclContent probe = MakeIcl(u.clean_demos, filtered[order[0]], ctx);
  auto plans = attack::PlanVariables(probe, repo.task.language, cfg.subs, gw, embedder);

  std::vector<std::optional<attack::Readout>> clean_readouts;
  std::optional<std::vector<attack::DemoPair>> incumbent;
  double incumbent_asr = 0.0;
  for (std::size_t it = 0; it < order.size() && it < cfg.max_iterations; ++it) {
    const corpus::Query& q = filtered[order[it]];
    attack::IclContent icl = MakeIcl(u.clean_demos, q, ctx);
    attack::AttackOutcome outcome =
        attack::GreedyMutate(gw, repo.task, icl, plans, cfg.criterion, ctx.labels);
    if (outcome.aborted) throw Error(ErrorCode::kBackendUnavailable, outcome.abort_reason);
    Iteration rec;
    rec.query_id = q.id;
    rec.flipped_on_query = outcome.flipped;
    rec.asr = SetAsr(outcome.bad_demos, u.clean_demos, filtered, ctx, &clean_readouts);
    ++u.iterations;
    if (!incumbent || rec.asr > incumbent_asr) {
      rec.accepted = true;
      bool converged = false;
      if (incumbent) {
        rec.distance = DemoDistance(*incumbent, outcome.bad_demos, embedder);
        converged = *rec.distance < cfg.distance_threshold;
      }
      incumbent = outcome.bad_demos;
      incumbent_asr = rec.asr;
      u.accepted_asr.push_back(rec.asr);
      u.log.push_back(rec);
      if (converged) break;
    } else {
      u.log.push_back(rec);
    }
  }
  u.bad_demos = incumbent ? *incumbent : u.clean_demos;
  u.asr_on_set = incumbent_asr;
  return u;
}

Bundle ToBundle(const UniversalBadIcl& u) {
  return {1, u.task, u.system_prompt, u.task_prompt, u.bad_demos};
}

attack::IclContent BundleIcl(const Bundle& b, const corpus::Query& query) {
  return attack::AssembleIcl(b.demos, query, b.task, b.system_prompt, b.task_prompt);
}

std::string SerializeBundle(const Bundle& b) {
  json demos = json::array();
  for (const auto& d : b.demos) demos.push_back({{"code", d.code}, {"answer", d.answer}});
  json j = {{"version", b.version},
            {"task", std::string(TaskVariantName(b.task.variant))},
            {"language", std::string(LanguageName(b.task.language))},
            {"systemPrompt", b.system_prompt},
            {"taskPrompt", b.task_prompt},
            {"demos", demos}};
  return j.dump(2) + "\n";
}

Bundle ParseBundle(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kIoError, "bundle is not valid JSON", e.byte);
  }
  try {
    Bundle b;
    b.version = j.at("version").get<int>();
    b.task.variant = ParseTaskVariant(j.at("task").get<std::string>());
    b.task.language = ParseLanguage(j.at("language").get<std::string>());
    b.system_prompt = j.at("systemPrompt").get<std::string>();
    b.task_prompt = j.at("taskPrompt").get<std::string>();
    for (const auto& d : j.at("demos")) {
      b.demos.push_back({d.at("code").get<std::string>(), d.at("answer").get<std::string>()});
    }
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("bundle field error: ") + e.what(), text.size());
  } catch (const Error& e) {
    throw Error(ErrorCode::kIoError, e.what(), text.size());
  }
}

void ExportIcl(const Bundle& b, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << SerializeBundle(b);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

void ExportIcl(const UniversalBadIcl& u, const std::string& path) { ExportIcl(ToBundle(u), path); }

Bundle ImportIcl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseBundle(ss.str());
}

}  // namespace iclforge::transfer

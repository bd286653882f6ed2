#include "iclforge/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "iclforge/attack/attack.hpp"
#include "iclforge/defense.hpp"
#include "iclforge/error.hpp"
#include "iclforge/hash.hpp"
#include "iclforge/metrics/bleu.hpp"
#include "iclforge/metrics/classification.hpp"
#include "iclforge/metrics/generation.hpp"
#include "iclforge/metrics/meteor.hpp"
#include "iclforge/metrics/rouge.hpp"
#include "iclforge/metrics/tokenize.hpp"
#include "iclforge/modelgw/http_backend.hpp"
#include "iclforge/modelgw/stub_backend.hpp"
#include "iclforge/parallel.hpp"
#include "iclforge/retrieval.hpp"
#include "iclforge/transfer.hpp"

namespace iclforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Context {
  const RunConfig& cfg;
  std::shared_ptr<modelgw::Backend> backend;
  modelgw::Gateway gw;
  retrieval::EmbeddingCache cache;
  retrieval::Embedder embedder;
  std::optional<corpus::Repository> repo;
  std::string system_prompt;
  std::string task_prompt;

  Context(const RunConfig& c, std::shared_ptr<modelgw::Backend> b)
      : cfg(c), backend(std::move(b)), gw(backend, c.mask_token), embedder(gw, &cache) {
    system_prompt = c.system_prompt.empty() ? attack::DefaultSystemPrompt(c.task) : c.system_prompt;
    task_prompt = c.task_prompt.empty() ? attack::DefaultTaskPrompt(c.task) : c.task_prompt;
  }

  const corpus::Repository& Repo() {
    if (repo) return *repo;
    if (cfg.data_path.empty()) throw Error(ErrorCode::kConfigError, "run.data (--data) is required");
    corpus::Repository r = corpus::LoadRepository(cfg.data_path, cfg.task, cfg.split);
    if (cfg.balance_ratio > 0.0) {
      std::size_t n = cfg.sample_n > 0 ? cfg.sample_n : r.demonstrations.size();
      r = corpus::BalanceAndSample(r, cfg.balance_ratio, n, cfg.seed);
    }
    repo = std::move(r);
    return *repo;
  }

  metrics::TokenEmbedder TokenEmbed() {
    return [this](std::string_view token) { return embedder.Embed(token).values; };
  }
};

ordered_json ReadoutJson(const attack::Readout& r) {
  ordered_json j;
  if (r.mode == TaskMode::kClassification) {
    j["label"] = r.label;
    j["confidence"] = r.confidence;
    j["per_label"] = r.per_label;
  } else {
    j["text"] = r.text;
    j["mean3"] = r.mean3;
  }
  return j;
}

attack::Readout ReadoutFromJson(const json& j, TaskMode mode) {
  attack::Readout r;
  r.mode = mode;
  if (mode == TaskMode::kClassification) {
    r.label = j.at("label").get<std::string>();
    r.confidence = j.at("confidence").get<double>();
    r.per_label = j.at("per_label").get<std::map<std::string, double>>();
  } else {
    r.text = j.at("text").get<std::string>();
    r.mean3 = j.at("mean3").get<double>();
  }
  return r;
}

std::string IclHash(const attack::IclContent& icl) {
  json turns = json::array();
  for (const auto& t : icl.Turns()) {
    turns.push_back({std::string(modelgw::RoleName(t.role)), t.content});
  }
  return ContentHash(turns.dump());
}

std::string Prediction(const attack::Readout& r) {
  return r.mode == TaskMode::kClassification ? r.label : r.text;
}

ordered_json DemosJson(const std::vector<attack::DemoPair>& demos) {
  ordered_json arr = ordered_json::array();
  for (const auto& d : demos) arr.push_back({{"code", d.code}, {"answer", d.answer}});
  return arr;
}

std::vector<attack::DemoPair> DemosFromJson(const json& arr) {
  std::vector<attack::DemoPair> out;
  for (const auto& d : arr) out.push_back({d.at("code").get<std::string>(), d.at("answer").get<std::string>()});
  return out;
}

std::string SafeFileName(const std::string& id) {
  std::string out;
  for (char c : id) out.push_back(IsIdentChar(c) || c == '-' || c == '.' ? c : '_');
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void WriteJson(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<corpus::Query> ResolveQueries(const RunConfig& cfg, const std::string& spec) {
  if (!spec.empty() && fs::is_regular_file(spec)) return corpus::LoadQueries(spec, cfg.task);
  if (cfg.test_path.empty()) {
    throw Error(ErrorCode::kConfigError, "run.test (--test) is required to resolve queries");
  }
  auto all = corpus::LoadQueries(cfg.test_path, cfg.task);
  if (spec.empty()) return all;
  for (const auto& q : all) {
    if (q.id == spec) return {q};
  }
  throw Error(ErrorCode::kInvalidArgument, "query '" + spec + "' not found in " + cfg.test_path);
}

std::vector<attack::DemoPair> SelectDemos(Context& ctx, const corpus::Query& q, std::size_t n,
                                          ordered_json* selection_json = nullptr) {
  std::vector<attack::DemoPair> demos;
  if (n == 0) {
    if (selection_json) *selection_json = ordered_json::array();
    return demos;
  }
  auto sel = retrieval::SelectTopN(q, ctx.Repo(), n, ctx.embedder);
  ordered_json arr = ordered_json::array();
  for (const auto& sd : sel.demonstrations) {
    demos.push_back({sd.demo.code, sd.demo.answer});
    arr.push_back({{"id", sd.demo.id}, {"similarity", sd.similarity}});
  }
  if (selection_json) *selection_json = std::move(arr);
  return demos;
}

ordered_json ScoresJson(const metrics::GenerationScores& s) {
  return {{"bleu", s.bleu}, {"rouge_l", s.rouge_l}, {"meteor", s.meteor}, {"bert_score", s.bert_score}};
}

metrics::GenerationScores ScoresFromJson(const ordered_json& j) {
  return {j.at("bleu").get<double>(), j.at("rouge_l").get<double>(), j.at("meteor").get<double>(),
          j.at("bert_score").get<double>()};
}

// Quality of a list of predictions against ground truth: ACC/F1 or mean
// generation scores. Null when some query has no ground truth.
ordered_json QualityJson(Context& ctx, const std::vector<std::string>& preds,
                         const std::vector<corpus::Query>& queries,
                         std::vector<metrics::GenerationScores>* per_query = nullptr) {
  std::vector<std::string> truths;
  for (const auto& q : queries) {
    if (!q.ground_truth) return nullptr;
    truths.push_back(*q.ground_truth);
  }
  if (preds.empty()) return nullptr;
  if (ctx.cfg.task.Mode() == TaskMode::kClassification) {
    auto t = metrics::Tally(preds, truths, ClassificationLabels()[1]);
    return {{"accuracy", metrics::Accuracy(t)},
            {"f1", metrics::F1(t)},
            {"tally", {{"tp", t.tp}, {"fp", t.fp}, {"tn", t.tn}, {"fn", t.fn}}}};
  }
  auto embed = ctx.TokenEmbed();
  metrics::GenerationScores mean;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto s = metrics::ScoreGeneration(preds[i], truths[i], &embed);
    if (per_query) per_query->push_back(s);
    mean.bleu += s.bleu;
    mean.rouge_l += s.rouge_l;
    mean.meteor += s.meteor;
    mean.bert_score += s.bert_score;
  }
  double n = static_cast<double>(preds.size());
  mean.bleu /= n;
  mean.rouge_l /= n;
  mean.meteor /= n;
  mean.bert_score /= n;
  return ScoresJson(mean);
}

// Classification: accDrop; generation: avgDrop (null on a zero baseline).
ordered_json DropJson(Context& ctx, const ordered_json& before, const ordered_json& after) {
  if (before.is_null() || after.is_null()) return nullptr;
  if (ctx.cfg.task.Mode() == TaskMode::kClassification) {
    return {{"acc_drop", metrics::AccDrop(before["accuracy"].get<double>(), after["accuracy"].get<double>())}};
  }
  try {
    return {{"avg_drop_percent", metrics::AvgDrop(ScoresFromJson(before), ScoresFromJson(after))}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kZeroBaseline) throw;
    return {{"avg_drop_percent", nullptr}, {"zero_baseline", e.detail()}};
  }
}

// ---- select ---------------------------------------------------------------

ordered_json RunSelect(Context& ctx, const RunRequest& req) {
  auto queries = ResolveQueries(ctx.cfg, req.query);
  std::size_t n = std::max<std::size_t>(1, ctx.cfg.n_demos);
  ctx.Repo();
  std::vector<ordered_json> records(queries.size());
  ParallelFor(queries.size(), ctx.cfg.workers, [&](std::size_t i) {
    ordered_json sel;
    auto demos = SelectDemos(ctx, queries[i], n, &sel);
    auto icl = attack::AssembleIcl(demos, queries[i], ctx.cfg.task, ctx.system_prompt, ctx.task_prompt);
    records[i] = {{"query_id", queries[i].id}, {"selection", sel}, {"icl_hash", IclHash(icl)}};
  });
  ordered_json report;
  report["records"] = records;
  report["aggregates"] = {{"n_queries", queries.size()}, {"n_demos", n}};
  return report;
}

// ---- attack ---------------------------------------------------------------

ordered_json RunAttackStage(Context& ctx, const RunRequest& req, const fs::path& out_dir) {
  const RunConfig& cfg = ctx.cfg;
  if (cfg.attack.trigger.keywords.empty()) {
    throw Error(ErrorCode::kConfigError, "attack.triggers (--trigger) is required");
  }
  auto queries = ResolveQueries(cfg, req.query);
  if (cfg.n_demos > 0) ctx.Repo();
  fs::create_directories(out_dir / "trace");

  std::vector<ordered_json> records(queries.size());
  std::vector<attack::AttackOutcome> outcomes(queries.size());
  std::vector<std::string> pred_before(queries.size()), pred_after(queries.size());
  std::vector<std::uint64_t> eval_queries(queries.size(), 0);

  ParallelFor(queries.size(), cfg.workers, [&](std::size_t i) {
    const auto& q = queries[i];
    modelgw::Gateway scoped = ctx.gw.Scoped();
    ordered_json sel;
    auto demos = SelectDemos(ctx, q, cfg.n_demos, &sel);
    auto clean = attack::AssembleIcl(demos, q, cfg.task, ctx.system_prompt, ctx.task_prompt);
    auto outcome = attack::RunAttack(scoped, ctx.embedder, cfg.task, clean, cfg.attack);

    attack::IclContent served = clean;
    served.demos = outcome.bad_demos;
    attack::Readout before, after;
    if (outcome.baseline) {
      before = *outcome.baseline;
      after = outcome.final_readout ? *outcome.final_readout : before;
    } else {
      attack::Evaluator ev(scoped, cfg.task);
      before = ev.Evaluate(clean);
      after = before;
      eval_queries[i] = scoped.Counts().ModelQueries() - outcome.queries_used;
    }
    pred_before[i] = Prediction(before);
    pred_after[i] = Prediction(after);

    ordered_json r;
    r["query_id"] = q.id;
    r["query_code"] = q.code;
    r["ground_truth"] = q.ground_truth ? json(*q.ground_truth) : json(nullptr);
    r["selection"] = sel;
    r["triggered"] = outcome.triggered;
    r["icl_hash_clean"] = IclHash(clean);
    r["icl_hash_served"] = IclHash(served);
    r["served_demos"] = DemosJson(outcome.bad_demos);
    r["baseline"] = ReadoutJson(before);
    r["final"] = ReadoutJson(after);
    r["flipped"] = outcome.flipped;
    r["aborted"] = outcome.aborted;
    if (outcome.aborted) r["abort_reason"] = outcome.abort_reason;
    r["flip_potential"] = outcome.flip_potential;
    r["queries_used"] = outcome.queries_used;
    r["eval_queries"] = eval_queries[i];
    r["trace_length"] = outcome.trace.size();
    r["trace_file"] = "trace/" + SafeFileName(q.id) + ".json";
    records[i] = std::move(r);

    ordered_json trace;
    trace["query_id"] = q.id;
    trace["triggered"] = outcome.triggered;
    ordered_json vul = ordered_json::array();
    for (const auto& v : outcome.vul_scores) {
      vul.push_back({{"demo", v.demo}, {"variable", v.variable}, {"score", v.score}});
    }
    ordered_json trials = ordered_json::array();
    for (const auto& t : outcome.trace) {
      trials.push_back({{"demo", t.demo}, {"variable", t.variable}, {"substitute", t.substitute},
                        {"score", t.score}, {"flipped", t.flipped}});
    }
    ordered_json skips = ordered_json::array();
    for (const auto& s : outcome.skips) {
      skips.push_back({{"demo", s.demo}, {"variable", s.variable}, {"reason", s.reason}});
    }
    trace["vul_scores"] = vul;
    trace["trials"] = trials;
    trace["skips"] = skips;
    WriteJson(out_dir / "trace" / (SafeFileName(q.id) + ".json"), trace);
    outcomes[i] = std::move(outcome);
  });

  std::size_t flips = 0, triggered = 0, aborted = 0;
  std::uint64_t attack_queries = 0, eval_total = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    flips += outcomes[i].flipped ? 1 : 0;
    triggered += outcomes[i].triggered ? 1 : 0;
    aborted += outcomes[i].aborted ? 1 : 0;
    attack_queries += outcomes[i].queries_used;
    eval_total += eval_queries[i];
  }
  ordered_json agg;
  agg["n_queries"] = queries.size();
  agg["n_triggered"] = triggered;
  agg["n_aborted"] = aborted;
  agg["flips"] = flips;
  agg["asr"] = metrics::Asr(flips, queries.size());
  agg["attack_model_queries"] = attack_queries;
  agg["eval_model_queries"] = eval_total;
  agg["qt"] = flips > 0 ? json(metrics::QueryTime(attack_queries, flips)) : json(nullptr);
  ordered_json q_before = QualityJson(ctx, pred_before, queries);
  ordered_json q_after = QualityJson(ctx, pred_after, queries);
  agg["quality_before"] = q_before;
  agg["quality_after"] = q_after;
  agg["drop"] = DropJson(ctx, q_before, q_after);

  ordered_json report;
  report["records"] = records;
  report["aggregates"] = agg;
  return report;
}

// ---- evaluate -------------------------------------------------------------

ordered_json RunEvaluate(Context& ctx, const RunRequest& req) {
  const RunConfig& cfg = ctx.cfg;
  auto queries = ResolveQueries(cfg, req.query);
  std::optional<transfer::Bundle> bundle;
  if (!req.icl_path.empty()) bundle = transfer::ImportIcl(req.icl_path);
  if (cfg.n_demos > 0) ctx.Repo();

  std::vector<ordered_json> records(queries.size());
  std::vector<std::string> clean_preds(queries.size()), bundle_preds(queries.size());
  std::vector<char> flipped(queries.size(), 0);
  ParallelFor(queries.size(), cfg.workers, [&](std::size_t i) {
    const auto& q = queries[i];
    attack::Evaluator ev(ctx.gw, cfg.task);
    ordered_json sel;
    auto demos = SelectDemos(ctx, q, cfg.n_demos, &sel);
    auto clean = attack::AssembleIcl(demos, q, cfg.task, ctx.system_prompt, ctx.task_prompt);
    auto before = ev.Evaluate(clean);
    clean_preds[i] = Prediction(before);
    ordered_json r;
    r["query_id"] = q.id;
    r["ground_truth"] = q.ground_truth ? json(*q.ground_truth) : json(nullptr);
    r["selection"] = sel;
    r["icl_hash_clean"] = IclHash(clean);
    r["clean"] = ReadoutJson(before);
    if (bundle) {
      auto bad = transfer::BundleIcl(*bundle, q);
      auto after = ev.Evaluate(bad, cfg.task.Mode() == TaskMode::kGeneration ? &before.text : nullptr);
      bundle_preds[i] = Prediction(after);
      flipped[i] = attack::IsFlip(before, after, cfg.attack.criterion);
      r["icl_hash_bundle"] = IclHash(bad);
      r["bundle"] = ReadoutJson(after);
      r["flipped"] = static_cast<bool>(flipped[i]);
    }
    records[i] = std::move(r);
  });

  ordered_json agg;
  agg["n_queries"] = queries.size();
  agg["n_demos"] = cfg.n_demos;
  agg["attack_records"] = 0;
  ordered_json q_clean = QualityJson(ctx, clean_preds, queries);
  agg["quality"] = q_clean;
  if (bundle) {
    std::size_t flips = static_cast<std::size_t>(std::count(flipped.begin(), flipped.end(), 1));
    agg["bundle_demos"] = bundle->demos.size();
    agg["flips"] = flips;
    agg["asr"] = metrics::Asr(flips, queries.size());
    ordered_json q_bundle = QualityJson(ctx, bundle_preds, queries);
    agg["quality_bundle"] = q_bundle;
    agg["drop"] = DropJson(ctx, q_clean, q_bundle);
  }
  ordered_json report;
  report["records"] = records;
  report["aggregates"] = agg;
  return report;
}

// ---- transfer -------------------------------------------------------------

ordered_json RunTransfer(Context& ctx, const RunRequest& req, const fs::path& out_dir) {
  const RunConfig& cfg = ctx.cfg;
  std::string qpath = req.queries_path.empty() ? cfg.test_path : req.queries_path;
  if (qpath.empty()) throw Error(ErrorCode::kConfigError, "transfer needs --queries or --test");
  auto queries = corpus::LoadQueries(qpath, cfg.task);
  auto u = transfer::BuildUniversal(queries, ctx.Repo(), cfg.transfer, ctx.gw, ctx.embedder);
  fs::path bundle_path = req.bundle_out.empty() ? out_dir / "bundle.json" : fs::path(req.bundle_out);
  if (bundle_path.has_parent_path()) fs::create_directories(bundle_path.parent_path());
  transfer::ExportIcl(u, bundle_path.string());

  ordered_json log = ordered_json::array();
  for (const auto& it : u.log) {
    log.push_back({{"query_id", it.query_id},
                   {"asr", it.asr},
                   {"accepted", it.accepted},
                   {"flipped_on_query", it.flipped_on_query},
                   {"distance", it.distance ? json(*it.distance) : json(nullptr)}});
  }
  ordered_json report;
  report["records"] = log;
  report["aggregates"] = {{"n_queries", queries.size()},
                          {"filtered_queries", u.filtered_queries},
                          {"iterations", u.iterations},
                          {"accepted_asr", u.accepted_asr},
                          {"asr_on_set", u.asr_on_set},
                          {"bundle", bundle_path.string()},
                          {"clean_demos", DemosJson(u.clean_demos)}};
  return report;
}

// ---- defend ---------------------------------------------------------------

struct DefendCase {
  std::string query_id;
  attack::IclContent clean;  // empty demos when unknown
  bool has_clean = false;
  defense::AttackedCase attacked;
};

std::vector<DefendCase> CasesFromRun(Context& ctx, const fs::path& dir) {
  std::ifstream in(dir / "report.json", std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + (dir / "report.json").string());
  json report;
  try {
    report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kIoError, "run report is not valid JSON", e.byte);
  }
  if (report.value("subcommand", "") != "attack") {
    throw Error(ErrorCode::kInvalidArgument, "defend --icl <dir> needs an attack run");
  }
  const auto& prompts = report.at("prompts");
  std::string system = prompts.at("system").get<std::string>();
  std::string task = prompts.at("task").get<std::string>();
  std::vector<DefendCase> cases;
  for (const auto& r : report.at("records")) {
    DefendCase c;
    c.query_id = r.at("query_id").get<std::string>();
    corpus::Query q{c.query_id, r.at("query_code").get<std::string>(), std::nullopt};
    c.attacked.bad_icl = attack::AssembleIcl(DemosFromJson(r.at("served_demos")), q, ctx.cfg.task, system, task);
    c.attacked.baseline = ReadoutFromJson(r.at("baseline"), ctx.cfg.task.Mode());
    c.attacked.flipped = r.at("flipped").get<bool>();
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<DefendCase> CasesFromBundle(Context& ctx, const transfer::Bundle& bundle) {
  const RunConfig& cfg = ctx.cfg;
  auto queries = ResolveQueries(cfg, "");
  std::vector<DefendCase> cases(queries.size());
  bool have_repo = !cfg.data_path.empty();
  if (have_repo) ctx.Repo();
  ParallelFor(queries.size(), cfg.workers, [&](std::size_t i) {
    const auto& q = queries[i];
    attack::Evaluator ev(ctx.gw, cfg.task);
    std::vector<attack::DemoPair> demos;
    if (have_repo && !bundle.demos.empty()) demos = SelectDemos(ctx, q, bundle.demos.size());
    DefendCase& c = cases[i];
    c.query_id = q.id;
    c.clean = attack::AssembleIcl(demos, q, cfg.task, bundle.system_prompt, bundle.task_prompt);
    c.has_clean = true;
    c.attacked.bad_icl = transfer::BundleIcl(bundle, q);
    c.attacked.baseline = ev.Evaluate(c.clean);
    auto after = ev.Evaluate(c.attacked.bad_icl, cfg.task.Mode() == TaskMode::kGeneration
                                                     ? &c.attacked.baseline.text
                                                     : nullptr);
    c.attacked.flipped = attack::IsFlip(c.attacked.baseline, after, cfg.attack.criterion);
  });
  return cases;
}

ordered_json RunDefend(Context& ctx, const RunRequest& req) {
  const RunConfig& cfg = ctx.cfg;
  std::string method = req.method.empty() ? cfg.defense.method : req.method;
  if (method != "onion" && method != "strip") {
    throw Error(ErrorCode::kConfigError, "--method must be onion or strip");
  }
  if (req.icl_path.empty()) throw Error(ErrorCode::kConfigError, "defend needs --icl <bundle|run>");
  if (method == "strip" && cfg.task.Mode() != TaskMode::kClassification) {
    throw Error(ErrorCode::kConfigError, "STRIP needs a classification task");
  }
  std::vector<DefendCase> cases = fs::is_directory(req.icl_path)
                                      ? CasesFromRun(ctx, req.icl_path)
                                      : CasesFromBundle(ctx, transfer::ImportIcl(req.icl_path));

  std::vector<std::string> benign;
  if (method == "strip") {
    for (const auto& d : ctx.Repo().demonstrations) benign.push_back(d.code);
  }

  double threshold = req.threshold ? *req.threshold : cfg.defense.threshold;
  bool calibrated = false;
  if (cfg.defense.calibrate && !req.threshold) {
    std::vector<double> scores;
    for (const auto& c : cases) {
      if (!c.has_clean || c.clean.demos.empty()) continue;
      if (method == "onion") {
        auto rep = defense::OnionFilter(c.clean, std::numeric_limits<double>::infinity(), ctx.gw).second;
        for (const auto& t : rep.tokens) scores.push_back(t.score);
      } else {
        scores.push_back(defense::StripDetect(c.clean, cfg.defense.perturbations, 0.0,
                                              cfg.defense.seed, benign, ctx.gw)
                             .entropy);
      }
    }
    if (!scores.empty()) {
      threshold = method == "onion" ? defense::CalibrateUpper(scores, cfg.defense.frr)
                                    : defense::CalibrateLower(scores, cfg.defense.frr);
      calibrated = true;
    }
  }

  std::vector<ordered_json> details(cases.size());
  std::size_t current = 0;
  defense::DefenseFn fn;
  if (method == "onion") {
    fn = [&](const attack::IclContent& icl) {
      auto [filtered, rep] = defense::OnionFilter(icl, threshold, ctx.gw);
      ordered_json removed = ordered_json::array();
      for (std::size_t k : rep.removed) removed.push_back({{"demo", rep.tokens[k].demo}, {"token", rep.tokens[k].token}, {"score", rep.tokens[k].score}});
      details[current] = {{"tokens_scored", rep.tokens.size()}, {"removed", removed}};
      return filtered;
    };
  } else {
    fn = [&](const attack::IclContent& icl) {
      auto v = defense::StripDetect(icl, cfg.defense.perturbations, threshold, cfg.defense.seed, benign, ctx.gw);
      details[current] = {{"entropy_bits", v.entropy},
                          {"verdict", v.verdict == defense::Verdict::kSuspicious ? "suspicious" : "clean"},
                          {"label_counts", v.label_counts}};
      if (v.verdict == defense::Verdict::kClean) return icl;
      attack::IclContent out = icl;
      out.demos.clear();
      return out;
    };
  }

  std::vector<defense::AttackedCase> attacked;
  for (const auto& c : cases) attacked.push_back(c.attacked);
  attack::Evaluator ev(ctx.gw, cfg.task);
  defense::DefenseFn tracked = [&](const attack::IclContent& icl) {
    auto out = fn(icl);
    ++current;
    return out;
  };
  auto result = defense::EvaluateDefense(attacked, tracked, cfg.attack.criterion, ev);

  std::vector<ordered_json> records;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    records.push_back({{"query_id", cases[i].query_id},
                       {"flipped_before", cases[i].attacked.flipped},
                       {"flipped_after", static_cast<bool>(result.flipped_after[i])},
                       {"defense", details[i]}});
  }
  ordered_json report;
  report["records"] = records;
  report["aggregates"] = {{"method", method},
                          {"threshold", threshold},
                          {"calibrated", calibrated},
                          {"frr", cfg.defense.frr},
                          {"n_cases", cases.size()},
                          {"asr_before", result.asr_before},
                          {"asr_after", result.asr_after}};
  return report;
}

ordered_json ErrorJson(const Error& e) {
  ordered_json j = {{"code", std::string(ErrorCodeName(e.code()))}, {"detail", e.detail()}};
  j["position"] = e.position() ? json(*e.position()) : json(nullptr);
  return j;
}

}  // namespace

std::shared_ptr<modelgw::Backend> MakeBackend(const RunConfig& cfg) {
  if (cfg.backend == BackendKind::kStub) return std::make_shared<modelgw::StubBackend>(cfg.stub);
  return std::make_shared<modelgw::HttpBackend>(cfg.backend_url, cfg.backend_timeout);
}

int Run(const RunConfig& cfg, const RunRequest& req, std::shared_ptr<modelgw::Backend> backend) {
  auto start = std::chrono::steady_clock::now();
  fs::path out_dir(cfg.out_dir);
  ordered_json report;
  report["tool"] = "iclforge";
  report["subcommand"] = req.subcommand;
  report["config"] = cfg.echo;
  int status = 0;
  std::optional<Context> ctx;
  try {
    fs::create_directories(out_dir);
    if (!backend) backend = MakeBackend(cfg);
    ctx.emplace(cfg, backend);
    report["prompts"] = {{"system", ctx->system_prompt}, {"task", ctx->task_prompt}};
    report["settings"] = {
        {"backend", backend->Id()},
        {"readout", cfg.task.Mode() == TaskMode::kClassification ? "classify (label probabilities)"
                                                                 : "complete (generated text)"},
        {"tokenizer", std::string(metrics::kTokenizerDescription)},
        {"bleu_smoothing", std::string(metrics::kBleuSmoothing)},
        {"rouge_beta2", metrics::kRougeBeta2},
        {"meteor", std::string(metrics::kMeteorVariant)},
        {"bertscore", "candidate-to-reference greedy matching over gateway token embeddings"}};
    ordered_json body;
    if (req.subcommand == "select") {
      body = RunSelect(*ctx, req);
    } else if (req.subcommand == "attack") {
      body = RunAttackStage(*ctx, req, out_dir);
    } else if (req.subcommand == "evaluate") {
      body = RunEvaluate(*ctx, req);
    } else if (req.subcommand == "transfer") {
      body = RunTransfer(*ctx, req, out_dir);
    } else if (req.subcommand == "defend") {
      body = RunDefend(*ctx, req);
    } else {
      throw Error(ErrorCode::kConfigError, "unknown subcommand '" + req.subcommand + "'");
    }
    report["records"] = body["records"];
    report["aggregates"] = body["aggregates"];
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    status = e.code() == ErrorCode::kConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    report["error"] = {{"code", "InternalError"}, {"detail", e.what()}, {"position", nullptr}};
    status = 1;
  }
  if (ctx) {
    auto counts = ctx->gw.GlobalCounts();
    report["gateway"] = {{"complete", counts.complete},
                         {"classify", counts.classify},
                         {"model_queries", counts.ModelQueries()}};
    report["runtime"] = {{"embed_calls", counts.embed},
                         {"infill_calls", counts.infill},
                         {"logprob_calls", counts.logprobs}};
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["runtime"]["wall_seconds"] = wall;
  try {
    fs::create_directories(out_dir);
    WriteJson(out_dir / "report.json", report);
  } catch (const std::exception& e) {
    std::cerr << "iclforge: cannot write report: " << e.what() << "\n";
    return 1;
  }
  if (report.contains("error")) {
    std::cerr << "iclforge: " << report["error"]["code"].get<std::string>() << ": "
              << report["error"]["detail"].get<std::string>() << "\n";
  }
  return status;
}

}  // namespace iclforge::pipeline

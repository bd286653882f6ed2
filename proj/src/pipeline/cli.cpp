#include "iclforge/pipeline/cli.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iclforge/error.hpp"
#include "iclforge/pipeline/config.hpp"
#include "iclforge/pipeline/pipeline.hpp"

namespace iclforge::pipeline {

namespace {

struct GlobalFlags {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::string> triggers;
  Settings direct;
};

void AddSetting(CLI::App* app, GlobalFlags& g, const std::string& flag, const std::string& key,
                const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&g, key](const std::string& v) { g.direct[key] = v; }, help);
}

void AddGlobalFlags(CLI::App& app, GlobalFlags& g) {
  app.add_option("--config", g.config, "INI config file with [section] key = value entries");
  AddSetting(&app, g, "--backend", "backend.kind", "stub | remote");
  AddSetting(&app, g, "--stub-seed", "stub.seed", "seed of the deterministic stub model");
  AddSetting(&app, g, "--data", "run.data", "demonstration repository (JSONL)");
  AddSetting(&app, g, "--task", "run.task", "defect | clone | summarization | translation");
  AddSetting(&app, g, "--language", "run.language", "c | python | java");
  AddSetting(&app, g, "--split", "run.split", "train | dev | test");
  AddSetting(&app, g, "--test", "run.test", "query file (JSONL)");
  AddSetting(&app, g, "--n", "run.n", "number of demonstrations: 0, 1, 3, 5 or 7");
  AddSetting(&app, g, "--workers", "run.workers", "worker threads");
  AddSetting(&app, g, "--seed", "run.seed", "sampling seed");
  AddSetting(&app, g, "--mask-token", "backend.mask_token", "mask sentinel for infilling");
  AddSetting(&app, g, "--out,--out-dir", "run.out", "output directory");
  app.add_option("--trigger", g.triggers, "trigger keyword (repeatable)")->allow_extra_args(false);
  app.add_option("--set", g.sets, "override any setting: section.key=value (repeatable)")
      ->allow_extra_args(false);
}

Settings Collect(const GlobalFlags& g) {
  Settings s = DefaultSettings();
  if (!g.config.empty()) Merge(s, ReadConfigFile(g.config));
  ApplyEnvironment(s);
  Settings flags = g.direct;
  if (!g.triggers.empty()) {
    std::string joined;
    for (const auto& t : g.triggers) joined += (joined.empty() ? "" : ",") + t;
    flags["attack.triggers"] = joined;
  }
  for (const auto& kv : g.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kConfigError, "--set expects section.key=value, got '" + kv + "'");
    }
    flags[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  Merge(s, flags);
  return s;
}

}  // namespace

int RunCli(int argc, char** argv) {
  CLI::App app{"iclforge: ICL poisoning toolkit for code tasks"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  AddGlobalFlags(app, g);

  RunRequest req;
  std::optional<double> threshold;

  auto* select = app.add_subcommand("select", "retrieve demonstrations for queries");
  select->add_option("--query", req.query, "query id in --test, or a query file");

  auto* attack = app.add_subcommand("attack", "mutate demonstrations against each query");
  attack->add_option("--query", req.query, "query id in --test, or a query file");

  auto* transfer = app.add_subcommand("transfer", "build a universal bad ICL bundle");
  transfer->add_option("--queries", req.queries_path, "query set file");
  transfer->add_option("--out", req.bundle_out, "bundle path");

  auto* evaluate = app.add_subcommand("evaluate", "clean metrics, optionally against a bundle");
  evaluate->add_option("--icl", req.icl_path, "bundle file");
  evaluate->add_option("--query", req.query, "query id in --test, or a query file");

  auto* defend = app.add_subcommand("defend", "apply ONION or STRIP to bad ICL");
  defend->add_option("--method", req.method, "onion | strip")
      ->check(CLI::IsMember({"onion", "strip"}));
  defend->add_option("--icl", req.icl_path, "bundle file or attack run directory");
  defend->add_option_function<double>(
      "--threshold", [&](const double& t) { threshold = t; }, "decision threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  req.subcommand = app.get_subcommands().front()->get_name();
  req.threshold = threshold;

  RunConfig cfg;
  try {
    cfg = BuildRunConfig(Collect(g));
  } catch (const Error& e) {
    std::cerr << "iclforge: " << ErrorCodeName(e.code()) << ": " << e.detail() << "\n";
    return e.code() == ErrorCode::kConfigError ? 2 : 1;
  }
  int status = Run(cfg, req);
  if (status == 0) std::cout << cfg.out_dir << "/report.json\n";
  return status;
}

}  // namespace iclforge::pipeline

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "iclforge/modelgw/backend.hpp"
#include "iclforge/pipeline/config.hpp"

namespace iclforge::pipeline {

// Subcommand-specific inputs that are not part of the shared config.
struct RunRequest {
  std::string subcommand;      // select | attack | transfer | evaluate | defend
  std::string query;           // attack/select: query id or query file
  std::string queries_path;    // transfer: query set file (defaults to run.test)
  std::string bundle_out;      // transfer: bundle path (defaults to <out>/bundle.json)
  std::string icl_path;        // evaluate/defend: bundle file or attack run directory
  std::string method;          // defend: overrides defense.method
  std::optional<double> threshold;  // defend: overrides defense.threshold
};

std::shared_ptr<modelgw::Backend> MakeBackend(const RunConfig& cfg);

// Executes one stage and writes <out>/report.json (plus trace/<id>.json for
// attack). Errors are written as an "error" record. Returns the process
// exit status: 0 success, 2 configuration error, 1 any other failure.
int Run(const RunConfig& cfg, const RunRequest& req,
        std::shared_ptr<modelgw::Backend> backend = nullptr);

}  // namespace iclforge::pipeline

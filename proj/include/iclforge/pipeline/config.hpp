#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iclforge/attack/attack.hpp"
#include "iclforge/corpus.hpp"
#include "iclforge/modelgw/stub_backend.hpp"
#include "iclforge/retrieval.hpp"
#include "iclforge/task.hpp"
#include "iclforge/transfer.hpp"

namespace iclforge::pipeline {

// Flat "section.key" -> value view of the configuration.
using Settings = std::map<std::string, std::string>;

// Every key the toolkit understands, with its default ("" = unset).
const Settings& DefaultSettings();

// INI file with [section] headers. Throws kConfigError.
Settings ReadConfigFile(const std::string& path);
// ICLFORGE_<SECTION>_<KEY> (upper case) for every known key.
void ApplyEnvironment(Settings& s);
// Throws kConfigError for keys outside DefaultSettings().
void Merge(Settings& into, const Settings& from);

enum class BackendKind { kStub, kRemote };

struct DefenseConfig {
  std::string method = "onion";
  double threshold = 0.0;
  std::size_t perturbations = 10;
  std::uint64_t seed = 0;
  double frr = 0.05;
  bool calibrate = false;
};

struct RunConfig {
  TaskKind task;
  std::string data_path;
  corpus::Split split = corpus::Split::kTrain;
  std::string test_path;
  std::size_t n_demos = 3;
  std::size_t workers = 1;
  std::string out_dir = "iclforge-out";
  std::uint64_t seed = 0;
  double balance_ratio = 0.0;  // 0: no balancing
  std::size_t sample_n = 0;
  std::string system_prompt;
  std::string task_prompt;

  BackendKind backend = BackendKind::kStub;
  std::string backend_url;
  int backend_timeout = 120;
  std::string mask_token = "<mask>";
  modelgw::StubConfig stub;

  attack::AttackConfig attack;
  transfer::TransferConfig transfer;
  DefenseConfig defense;

  Settings echo;  // the merged settings this config was built from
};

// Typed view with validation (n_demos in {0,1,3,5,7}, ranges, enums).
// Throws kConfigError.
RunConfig BuildRunConfig(const Settings& s);

std::vector<std::string> SplitList(const std::string& s, char sep = ',');

}  // namespace iclforge::pipeline

#include "iclforge/pipeline/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "iclforge/error.hpp"

namespace iclforge::pipeline {

namespace {

std::string Trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c); };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

const std::string& Get(const Settings& s, const std::string& key) {
  auto it = s.find(key);
  if (it == s.end()) throw Error(ErrorCode::kConfigError, "missing setting " + key);
  return it->second;
}

double ToDouble(const Settings& s, const std::string& key) {
  const std::string& v = Get(s, key);
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfigError, key + ": '" + v + "' is not a number");
  }
}

std::uint64_t ToUnsigned(const Settings& s, const std::string& key) {
  const std::string& v = Get(s, key);
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw Error(ErrorCode::kConfigError, key + ": '" + v + "' is not a non-negative integer");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfigError, key + ": '" + v + "' is out of range");
  }
}

bool ToBool(const Settings& s, const std::string& key) {
  std::string v = Get(s, key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  throw Error(ErrorCode::kConfigError, key + ": '" + v + "' is not a boolean");
}

template <typename F>
auto Wrap(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    throw Error(ErrorCode::kConfigError, key + ": " + e.detail());
  }
}

}  // namespace

const Settings& DefaultSettings() {
  static const Settings defaults = {
      {"run.task", "defect"},
      {"run.language", "c"},
      {"run.data", ""},
      {"run.split", "train"},
      {"run.test", ""},
      {"run.n", "3"},
      {"run.workers", "1"},
      {"run.out", "iclforge-out"},
      {"run.seed", "0"},
      {"run.balance_ratio", "0"},
      {"run.sample", "0"},
      {"run.system_prompt", ""},
      {"run.task_prompt", ""},
      {"backend.kind", "stub"},
      {"backend.url", ""},
      {"backend.timeout", "120"},
      {"backend.mask_token", "<mask>"},
      {"stub.seed", "0"},
      {"stub.base_scale", "1.0"},
      {"stub.noise_scale", "0.05"},
      {"stub.rules", ""},
      {"stub.proposals", ""},
      {"stub.embedding_dim", "256"},
      {"stub.default_logprob", "-1.0"},
      {"stub.logprob_overrides", ""},
      {"attack.triggers", ""},
      {"attack.scope", "query"},
      {"attack.match", "exact"},
      {"attack.i", "80"},
      {"attack.k", "40"},
      {"attack.all_occurrences", "false"},
      {"attack.drop_fraction", "0.5"},
      {"attack.boundary_mode", "false"},
      {"attack.boundary", "0.5"},
      {"transfer.query_set_size", "0"},
      {"transfer.seed", "0"},
      {"transfer.distance_threshold", "0.05"},
      {"transfer.max_iterations", "50"},
      {"transfer.pool", "mean"},
      {"defense.method", "onion"},
      {"defense.threshold", "0"},
      {"defense.perturbations", "10"},
      {"defense.seed", "0"},
      {"defense.frr", "0.05"},
      {"defense.calibrate", "false"},
  };
  return defaults;
}

void Merge(Settings& into, const Settings& from) {
  const auto& known = DefaultSettings();
  for (const auto& [k, v] : from) {
    if (!known.count(k)) throw Error(ErrorCode::kConfigError, "unknown setting '" + k + "'");
    into[k] = v;
  }
}

Settings ReadConfigFile(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigError, e.message() + " in " + path, e.line());
  }
  Settings out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(ErrorCode::kConfigError, "key '" + section + "' outside any [section]");
    }
    for (const auto& [key, value] : body) {
      out[section + "." + key] = Trim(value.get_value<std::string>());
    }
  }
  Settings checked;
  Merge(checked, out);
  return checked;
}

void ApplyEnvironment(Settings& s) {
  for (const auto& [key, _] : DefaultSettings()) {
    std::string env = "ICLFORGE_" + key;
    for (char& c : env) c = c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(env.c_str())) s[key] = v;
  }
}

std::vector<std::string> SplitList(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (auto t = Trim(cur); !t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (auto t = Trim(cur); !t.empty()) out.push_back(t);
  return out;
}

RunConfig BuildRunConfig(const Settings& input) {
  Settings s = DefaultSettings();
  Merge(s, input);
  RunConfig c;
  c.echo = s;

  c.task.variant = Wrap("run.task", [&] { return ParseTaskVariant(s["run.task"]); });
  c.task.language = Wrap("run.language", [&] { return ParseLanguage(s["run.language"]); });
  c.data_path = s["run.data"];
  c.split = Wrap("run.split", [&] { return corpus::ParseSplit(s["run.split"]); });
  c.test_path = s["run.test"];
  c.n_demos = ToUnsigned(s, "run.n");
  if (c.n_demos != 0 && c.n_demos != 1 && c.n_demos != 3 && c.n_demos != 5 && c.n_demos != 7) {
    throw Error(ErrorCode::kConfigError, "run.n must be one of 0, 1, 3, 5, 7");
  }
  c.workers = std::max<std::uint64_t>(1, ToUnsigned(s, "run.workers"));
  c.out_dir = s["run.out"];
  c.seed = ToUnsigned(s, "run.seed");
  c.balance_ratio = ToDouble(s, "run.balance_ratio");
  if (c.balance_ratio < 0.0) throw Error(ErrorCode::kConfigError, "run.balance_ratio must be >= 0");
  c.sample_n = ToUnsigned(s, "run.sample");
  c.system_prompt = s["run.system_prompt"];
  c.task_prompt = s["run.task_prompt"];

  const std::string& kind = s["backend.kind"];
  if (kind == "stub") {
    c.backend = BackendKind::kStub;
  } else if (kind == "remote") {
    c.backend = BackendKind::kRemote;
  } else {
    throw Error(ErrorCode::kConfigError, "backend.kind must be stub or remote");
  }
  c.backend_url = s["backend.url"];
  c.backend_timeout = static_cast<int>(ToUnsigned(s, "backend.timeout"));
  c.mask_token = s["backend.mask_token"];
  if (c.mask_token.empty()) throw Error(ErrorCode::kConfigError, "backend.mask_token is empty");

  c.stub.seed = ToUnsigned(s, "stub.seed");
  c.stub.mode = c.task.Mode();
  c.stub.base_scale = ToDouble(s, "stub.base_scale");
  c.stub.noise_scale = ToDouble(s, "stub.noise_scale");
  for (const auto& rule : SplitList(s["stub.rules"])) {
    auto parts = SplitList(rule, ':');
    if (parts.size() != 3) {
      throw Error(ErrorCode::kConfigError, "stub.rules entries are identifier:label:weight");
    }
    Settings one{{"w", parts[2]}};
    c.stub.rules.push_back({parts[0], parts[1], ToDouble(one, "w")});
  }
  c.stub.proposals = SplitList(s["stub.proposals"]);
  c.stub.embedding_dim = ToUnsigned(s, "stub.embedding_dim");
  if (c.stub.embedding_dim == 0) throw Error(ErrorCode::kConfigError, "stub.embedding_dim must be >= 1");
  c.stub.default_logprob = ToDouble(s, "stub.default_logprob");
  for (const auto& entry : SplitList(s["stub.logprob_overrides"])) {
    auto eq = entry.rfind('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfigError, "stub.logprob_overrides entries are token=value");
    Settings one{{"v", entry.substr(eq + 1)}};
    c.stub.logprob_overrides[entry.substr(0, eq)] = ToDouble(one, "v");
  }

  c.attack.trigger.keywords = SplitList(s["attack.triggers"]);
  const std::string& scope = s["attack.scope"];
  if (scope == "query") {
    c.attack.trigger.scope = attack::TriggerScope::kQueryCode;
  } else if (scope == "demo" || scope == "demonstration") {
    c.attack.trigger.scope = attack::TriggerScope::kDemonstrationCode;
  } else if (scope == "both") {
    c.attack.trigger.scope = attack::TriggerScope::kBoth;
  } else {
    throw Error(ErrorCode::kConfigError, "attack.scope must be query, demo or both");
  }
  const std::string& match = s["attack.match"];
  if (match == "exact") {
    c.attack.trigger.match = attack::MatchMode::kIdentifierExact;
  } else if (match == "substring") {
    c.attack.trigger.match = attack::MatchMode::kSubstring;
  } else {
    throw Error(ErrorCode::kConfigError, "attack.match must be exact or substring");
  }
  c.attack.subs.i = ToUnsigned(s, "attack.i");
  c.attack.subs.k = ToUnsigned(s, "attack.k");
  if (c.attack.subs.k == 0 || c.attack.subs.i < c.attack.subs.k) {
    throw Error(ErrorCode::kConfigError, "attack.i >= attack.k >= 1 required");
  }
  c.attack.subs.all_occurrences = ToBool(s, "attack.all_occurrences");
  c.attack.criterion.mode = c.task.Mode();
  c.attack.criterion.drop_fraction = ToDouble(s, "attack.drop_fraction");
  if (!(c.attack.criterion.drop_fraction > 0.0) || c.attack.criterion.drop_fraction > 1.0) {
    throw Error(ErrorCode::kConfigError, "attack.drop_fraction must lie in (0, 1]");
  }
  c.attack.criterion.boundary_mode = ToBool(s, "attack.boundary_mode");
  c.attack.criterion.boundary = ToDouble(s, "attack.boundary");
  if (!(c.attack.criterion.boundary > 0.0) || !(c.attack.criterion.boundary < 1.0)) {
    throw Error(ErrorCode::kConfigError, "attack.boundary must lie in (0, 1)");
  }

  c.transfer.query_set_size = ToUnsigned(s, "transfer.query_set_size");
  c.transfer.seed = ToUnsigned(s, "transfer.seed");
  c.transfer.distance_threshold = ToDouble(s, "transfer.distance_threshold");
  c.transfer.max_iterations = ToUnsigned(s, "transfer.max_iterations");
  const std::string& pool = s["transfer.pool"];
  if (pool == "mean") {
    c.transfer.pool = retrieval::PoolMode::kMean;
  } else if (pool == "concat") {
    c.transfer.pool = retrieval::PoolMode::kConcat;
  } else {
    throw Error(ErrorCode::kConfigError, "transfer.pool must be mean or concat");
  }
  c.transfer.n_demos = std::max<std::size_t>(1, c.n_demos);
  c.transfer.workers = c.workers;
  c.transfer.subs = c.attack.subs;
  c.transfer.criterion = c.attack.criterion;
  c.transfer.system_prompt = c.system_prompt;
  c.transfer.task_prompt = c.task_prompt;
  Wrap("transfer", [&] {
    transfer::ValidateConfig(c.transfer);
    return 0;
  });

  c.defense.method = s["defense.method"];
  if (c.defense.method != "onion" && c.defense.method != "strip") {
    throw Error(ErrorCode::kConfigError, "defense.method must be onion or strip");
  }
  c.defense.threshold = ToDouble(s, "defense.threshold");
  c.defense.perturbations = ToUnsigned(s, "defense.perturbations");
  if (c.defense.perturbations < 2) throw Error(ErrorCode::kConfigError, "defense.perturbations must be >= 2");
  c.defense.seed = ToUnsigned(s, "defense.seed");
  c.defense.frr = ToDouble(s, "defense.frr");
  if (c.defense.frr < 0.0 || c.defense.frr >= 1.0) throw Error(ErrorCode::kConfigError, "defense.frr must lie in [0, 1)");
  c.defense.calibrate = ToBool(s, "defense.calibrate");
  return c;
}

}  // namespace iclforge::pipeline

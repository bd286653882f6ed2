#include "iclforge/modelgw/stub_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "iclforge/error.hpp"
#include "iclforge/hash.hpp"
#include "iclforge/language.hpp"

namespace iclforge::modelgw {

namespace {

constexpr std::size_t kMaxGenerationWords = 12;

const std::vector<std::string>& BuiltinVocabulary() {
  static const std::vector<std::string> words = {
      "tmp",    "val",    "cnt",    "idx",    "buf",    "len",    "res",    "ret",
      "acc",    "total",  "count",  "value",  "result", "data",   "item",   "node",
      "key",    "flag",   "state",  "size",   "offset", "pos",    "cur",    "prev",
      "next",   "head",   "tail",   "left",   "right",  "lo",     "hi",     "mid",
      "num",    "sum",    "avg",    "max_v",  "min_v",  "ptr",    "ref",    "obj",
      "elem",   "entry",  "record", "field_", "arg0",   "param",  "input",  "output",
      "source", "target", "dest",   "src",    "dst",    "width",  "height", "depth",
      "level",  "limit",  "bound",  "step",   "delta",  "factor", "scale",  "ratio",
      "name",   "label",  "text",   "line",   "word",   "token",  "chunk",  "block",
      "frame",  "page",   "slot",   "cell",   "row",    "col",    "mask",   "bits",
      "for",    "while",  "class",  "\xC4\xA0" "alpha", "\xE2\x96\x81" "beta", "##gamma"};
  return words;
}

std::string ContextText(const Transcript& t, bool include_final_user) {
  std::size_t last_user = t.size();
  for (std::size_t i = t.size(); i-- > 0;) {
    if (t[i].role == Role::kUser) {
      last_user = i;
      break;
    }
  }
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!include_final_user && i == last_user) continue;
    out += t[i].content;
    out.push_back('\n');
  }
  return out;
}

std::string FinalUser(const Transcript& t) {
  for (std::size_t i = t.size(); i-- > 0;) {
    if (t[i].role == Role::kUser) return t[i].content;
  }
  return {};
}

std::vector<std::string> Words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (IsIdentChar(text[i])) {
      std::size_t j = i;
      while (j < text.size() && IsIdentChar(text[j])) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, text[i]);
      ++i;
    }
  }
  return out;
}

std::string HashWord(std::uint64_t h) {
  static const char* const kSyllables[] = {"ka", "lo", "mi", "nu", "re", "si", "ta", "vo"};
  std::string w;
  for (int i = 0; i < 3; ++i) {
    w += kSyllables[h & 7];
    h >>= 3;
  }
  return w;
}

}  // namespace

StubBackend::StubBackend(StubConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.embedding_dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding_dim must be >= 1");
}

std::string StubBackend::Id() const { return "stub:" + std::to_string(cfg_.seed); }

std::map<std::string, double> StubBackend::Classify(const Transcript& t,
                                                    const std::vector<std::string>& labels) {
  if (cfg_.classify_hook) return cfg_.classify_hook(t, labels);
  std::string query = FinalUser(t);
  std::string all = ContextText(t, true);
  std::uint64_t query_key = HashBytes(query, cfg_.seed);
  std::uint64_t all_key = HashBytes(all, cfg_.seed ^ 0x5bd1e995ULL);
  std::vector<double> logits;
  for (const auto& label : labels) {
    std::uint64_t lk = HashBytes(label);
    double z = cfg_.base_scale * SplitMix64(HashCombine(query_key, lk)).NextSigned();
    z += cfg_.noise_scale * SplitMix64(HashCombine(all_key, lk)).NextSigned();
    for (const auto& rule : cfg_.rules) {
      if (rule.label == label) z += rule.weight * static_cast<double>(CountWord(all, rule.identifier));
    }
    logits.push_back(z);
  }
  double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    sum += z;
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]] = logits[i] / sum;
  return out;
}

std::string StubBackend::Complete(const Transcript& t, const CompletionParams& p) {
  if (cfg_.complete_hook) return cfg_.complete_hook(t, p);
  if (cfg_.mode == TaskMode::kGeneration) return GenerationOutput(t, p.max_tokens);
  auto probs = Classify(t, cfg_.labels);
  std::string best;
  double best_p = -1.0;
  for (const auto& label : cfg_.labels) {
    if (probs[label] > best_p) {
      best = label;
      best_p = probs[label];
    }
  }
  return best;
}

std::string StubBackend::GenerationOutput(const Transcript& t, std::size_t max_tokens) const {
  std::string query = FinalUser(t);
  std::string context = ContextText(t, false);
  std::vector<std::string> words;
  for (auto& w : Words(query)) {
    if (words.size() >= std::min(kMaxGenerationWords, max_tokens)) break;
    if (IsIdentStart(w[0])) words.push_back(std::move(w));
  }
  if (words.empty()) words.push_back(HashWord(HashBytes(query, cfg_.seed)));
  double fraction = 0.0;
  for (const auto& rule : cfg_.rules) {
    fraction += rule.weight * static_cast<double>(CountWord(context, rule.identifier));
  }
  fraction = std::clamp(fraction, 0.0, 1.0);
  auto replaced = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(words.size())));
  // Replace the `replaced` positions with the smallest position hashes.
  std::vector<std::pair<std::uint64_t, std::size_t>> order;
  for (std::size_t i = 0; i < words.size(); ++i) {
    order.emplace_back(HashCombine(HashBytes(query, cfg_.seed), i), i);
  }
  std::sort(order.begin(), order.end());
  for (std::size_t k = 0; k < replaced; ++k) {
    std::size_t i = order[k].second;
    words[i] = HashWord(HashCombine(order[k].first, HashBytes(context)));
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
  return out.str();
}

std::vector<RawProposal> StubBackend::Infill(std::string_view prefix, std::string_view suffix,
                                             std::size_t n) {
  if (cfg_.infill_hook) return cfg_.infill_hook(prefix, suffix, n);
  std::vector<std::string> ordered;
  if (!cfg_.proposals.empty()) {
    ordered = cfg_.proposals;
  } else {
    std::string masked = std::string(prefix) + "\x01" + std::string(suffix);
    std::uint64_t key = HashBytes(masked, cfg_.seed);
    std::vector<std::pair<std::uint64_t, std::string>> keyed;
    for (const auto& w : BuiltinVocabulary()) keyed.emplace_back(HashCombine(key, HashBytes(w)), w);
    std::sort(keyed.begin(), keyed.end());
    for (auto& kv : keyed) ordered.push_back(std::move(kv.second));
  }
  std::vector<RawProposal> out;
  for (std::size_t i = 0; i < ordered.size() && i < n; ++i) {
    out.push_back({{ordered[i]}, 1.0 - 0.001 * static_cast<double>(i)});
  }
  return out;
}

std::vector<double> StubBackend::Embed(std::string_view text) {
  if (cfg_.embed_hook) {
    if (auto v = cfg_.embed_hook(text)) return *v;
  }
  if (auto it = cfg_.embedding_overrides.find(std::string(text)); it != cfg_.embedding_overrides.end()) {
    return it->second;
  }
  std::vector<double> v(cfg_.embedding_dim, 0.0);
  auto add = [&](std::string_view feature, double weight) {
    std::uint64_t h = HashBytes(feature, cfg_.seed);
    double sign = (h >> 63) ? 1.0 : -1.0;
    v[h % v.size()] += sign * weight;
  };
  auto words = Words(text);
  for (std::size_t i = 0; i < words.size(); ++i) {
    add("u:" + words[i], 1.0);
    if (i + 1 < words.size()) add("b:" + words[i] + " " + words[i + 1], 0.5);
    std::string padded = "#" + words[i] + "#";
    for (std::size_t j = 0; j + 3 <= padded.size(); ++j) add("c:" + padded.substr(j, 3), 0.3);
  }
  SplitMix64 whole(HashBytes(text, cfg_.seed ^ 0x27d4eb2fULL));
  for (double& x : v) x += 0.02 * whole.NextSigned();
  return v;
}

std::vector<TokenLogProb> StubBackend::LogProbs(std::string_view text) {
  if (cfg_.logprob_hook) return cfg_.logprob_hook(text);
  std::vector<TokenLogProb> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    auto it = cfg_.logprob_overrides.find(tok);
    out.push_back({tok, it == cfg_.logprob_overrides.end() ? cfg_.default_logprob : it->second});
  }
  return out;
}

}  // namespace iclforge::modelgw

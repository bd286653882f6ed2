#include "iclforge/defense.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include "iclforge/error.hpp"
#include "iclforge/hash.hpp"
#include "iclforge/metrics/classification.hpp"

namespace iclforge::defense {

namespace {

struct Span {
  std::size_t demo;
  std::size_t begin;
  std::size_t end;
};

std::vector<Span> WhitespaceTokens(const std::vector<attack::DemoPair>& demos) {
  std::vector<Span> out;
  for (std::size_t d = 0; d < demos.size(); ++d) {
    const std::string& s = demos[d].code;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j > i) out.push_back({d, i, j});
      i = j;
    }
  }
  return out;
}

std::string JoinExcept(const std::vector<attack::DemoPair>& demos, const std::vector<Span>& spans,
                       std::size_t skip) {
  std::string out;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    if (k == skip) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(demos[spans[k].demo].code, spans[k].begin, spans[k].end - spans[k].begin);
  }
  return out;
}

std::vector<std::string> Lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

std::pair<attack::IclContent, SuspicionReport> OnionFilter(const attack::IclContent& icl,
                                                           double threshold, modelgw::Gateway& gw) {
  SuspicionReport report;
  report.threshold = threshold;
  report.scoring_model = gw.BackendId();
  auto spans = WhitespaceTokens(icl.demos);
  if (spans.empty()) return {icl, report};

  const std::size_t none = spans.size();
  double full = modelgw::Perplexity(gw.LogLikelihoods(JoinExcept(icl.demos, spans, none)));
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& sp = spans[k];
    TokenSuspicion ts{sp.demo, icl.demos[sp.demo].code.substr(sp.begin, sp.end - sp.begin), 0.0};
    if (spans.size() > 1) {
      ts.score = full - modelgw::Perplexity(gw.LogLikelihoods(JoinExcept(icl.demos, spans, k)));
    }
    if (ts.score > threshold) report.removed.push_back(k);
    report.tokens.push_back(std::move(ts));
  }

  attack::IclContent out = icl;
  // Right-to-left so earlier offsets stay valid.
  for (auto it = report.removed.rbegin(); it != report.removed.rend(); ++it) {
    const auto& sp = spans[*it];
    out.demos[sp.demo].code.erase(sp.begin, sp.end - sp.begin);
  }
  for (auto& d : out.demos) {
    if (d.code.find_first_not_of(" \t\r\n") == std::string::npos) d.code = " ";
  }
  return {out, report};
}

std::string InterleaveLines(const std::string& code, const std::string& snippet) {
  auto a = Lines(code);
  auto b = Lines(snippet);
  std::string out;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    if (i < a.size()) out += a[i] + "\n";
    if (i < b.size()) out += b[i] + "\n";
  }
  return out;
}

double ShannonEntropyBits(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

EntropyVerdict StripDetect(const attack::IclContent& icl, std::size_t n_perturbations,
                           double threshold, std::uint64_t seed,
                           const std::vector<std::string>& benign_snippets, modelgw::Gateway& gw,
                           const std::vector<std::string>& labels) {
  if (n_perturbations < 2) throw Error(ErrorCode::kInvalidArgument, "STRIP needs >= 2 perturbations");
  EntropyVerdict v;
  v.threshold = threshold;
  if (icl.demos.empty()) return v;
  if (benign_snippets.empty()) throw Error(ErrorCode::kInvalidArgument, "no benign snippets");
  v.n_perturbations = n_perturbations;
  std::mt19937_64 rng(HashCombine(seed, HashBytes(icl.query_code)));
  std::uniform_int_distribution<std::size_t> pick(0, benign_snippets.size() - 1);
  for (std::size_t p = 0; p < n_perturbations; ++p) {
    attack::IclContent perturbed = icl;
    for (auto& d : perturbed.demos) d.code = InterleaveLines(d.code, benign_snippets[pick(rng)]);
    ++v.label_counts[gw.Classify(perturbed.Turns(), labels).label];
  }
  v.entropy = ShannonEntropyBits(v.label_counts);
  v.verdict = v.entropy < threshold ? Verdict::kSuspicious : Verdict::kClean;
  return v;
}

DefenseFn OnionDefense(modelgw::Gateway& gw, double threshold) {
  return [&gw, threshold](const attack::IclContent& icl) {
    return OnionFilter(icl, threshold, gw).first;
  };
}

DefenseFn StripDefense(modelgw::Gateway& gw, std::size_t n_perturbations, double threshold,
                       std::uint64_t seed, std::vector<std::string> benign_snippets) {
  return [&gw, n_perturbations, threshold, seed,
          snippets = std::move(benign_snippets)](const attack::IclContent& icl) {
    auto v = StripDetect(icl, n_perturbations, threshold, seed, snippets, gw);
    if (v.verdict == Verdict::kClean) return icl;
    attack::IclContent out = icl;
    out.demos.clear();
    return out;
  };
}

DefenseResult EvaluateDefense(const std::vector<AttackedCase>& attacked, const DefenseFn& defense,
                              const attack::FlipCriterion& criterion, attack::Evaluator& ev) {
  DefenseResult r;
  std::size_t before = 0;
  std::size_t after = 0;
  for (const auto& c : attacked) {
    if (c.flipped) ++before;
    attack::IclContent defended = defense(c.bad_icl);
    attack::Readout out = ev.Evaluate(
        defended, c.baseline.mode == TaskMode::kGeneration ? &c.baseline.text : nullptr);
    bool flipped = attack::IsFlip(c.baseline, out, criterion);
    r.flipped_after.push_back(flipped);
    if (flipped) ++after;
  }
  r.asr_before = metrics::Asr(before, attacked.size());
  r.asr_after = metrics::Asr(after, attacked.size());
  return r;
}

double CalibrateUpper(std::vector<double> benign_scores, double frr) {
  if (benign_scores.empty()) throw Error(ErrorCode::kInvalidArgument, "no benign scores");
  if (frr < 0.0 || frr >= 1.0) throw Error(ErrorCode::kInvalidArgument, "frr must lie in [0, 1)");
  std::sort(benign_scores.begin(), benign_scores.end());
  double n = static_cast<double>(benign_scores.size());
  auto idx = static_cast<std::size_t>(std::ceil((1.0 - frr) * n));
  idx = std::clamp<std::size_t>(idx, 1, benign_scores.size()) - 1;
  return benign_scores[idx];
}

double CalibrateLower(std::vector<double> benign_scores, double frr) {
  if (benign_scores.empty()) throw Error(ErrorCode::kInvalidArgument, "no benign scores");
  if (frr < 0.0 || frr >= 1.0) throw Error(ErrorCode::kInvalidArgument, "frr must lie in [0, 1)");
  std::sort(benign_scores.begin(), benign_scores.end());
  auto idx = static_cast<std::size_t>(std::floor(frr * static_cast<double>(benign_scores.size())));
  return benign_scores[std::min(idx, benign_scores.size() - 1)];
}

}  // namespace iclforge::defense

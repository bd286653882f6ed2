#include "iclforge/attack/attack.hpp"

#include <algorithm>

#include "iclforge/error.hpp"
#include "iclforge/metrics/generation.hpp"
#include "iclforge/mutation/mutation.hpp"

namespace iclforge::attack {

bool DetectTrigger(std::string_view content, const TriggerConfig& cfg) {
  if (cfg.keywords.empty()) throw Error(ErrorCode::kInvalidArgument, "no trigger keywords");
  for (const auto& k : cfg.keywords) {
    if (k.empty()) continue;
    bool hit = cfg.match == MatchMode::kSubstring ? content.find(k) != std::string_view::npos
                                                  : ContainsWord(content, k);
    if (hit) return true;
  }
  return false;
}

bool TriggerFires(const TriggerConfig& cfg, std::string_view query_code,
                  const std::vector<DemoPair>& demos) {
  bool in_query = cfg.scope != TriggerScope::kDemonstrationCode && DetectTrigger(query_code, cfg);
  if (in_query) return true;
  if (cfg.scope == TriggerScope::kQueryCode) return false;
  return std::any_of(demos.begin(), demos.end(),
                     [&](const DemoPair& d) { return DetectTrigger(d.code, cfg); });
}

double Readout::ProbabilityOf(const std::string& l) const {
  auto it = per_label.find(l);
  return it == per_label.end() ? 0.0 : it->second;
}

double FlipPotential(const Readout& before, const Readout& after, const FlipCriterion& c) {
  if (before.mode != after.mode || before.mode != c.mode) {
    throw Error(ErrorCode::kModeMismatch, "readouts from different task modes");
  }
  if (c.mode == TaskMode::kClassification) {
    return before.ProbabilityOf(before.label) - after.ProbabilityOf(before.label);
  }
  if (!(before.mean3 > 0.0)) return 0.0;
  return (before.mean3 - after.mean3) / before.mean3;
}

bool IsFlip(const Readout& before, const Readout& after, const FlipCriterion& c) {
  double potential = FlipPotential(before, after, c);
  if (c.mode == TaskMode::kClassification) {
    if (after.label == before.label) return false;
    return !c.boundary_mode || after.confidence >= c.boundary;
  }
  return potential > c.drop_fraction;
}

Evaluator::Evaluator(modelgw::Gateway& gw, TaskKind task, std::vector<std::string> labels)
    : gw_(gw), task_(task), labels_(std::move(labels)) {}

Readout Evaluator::Evaluate(const IclContent& icl, const std::string* reference) {
  Readout r;
  r.mode = task_.Mode();
  auto turns = icl.Turns();
  if (r.mode == TaskMode::kClassification) {
    auto c = gw_.Classify(turns, labels_);
    r.label = c.label;
    r.confidence = c.confidence;
    r.per_label = std::move(c.per_label);
  } else {
    r.text = gw_.Complete(turns, modelgw::DefaultParams(TaskMode::kGeneration));
    r.mean3 = metrics::ScoreGeneration(r.text, reference ? *reference : r.text).Mean3();
  }
  return r;
}

double ReadoutValue(const Readout& r) {
  return r.mode == TaskMode::kClassification ? r.confidence : r.mean3;
}

IclContent WithDemoCode(const IclContent& icl, std::size_t slot, const std::string& code) {
  if (slot >= icl.demos.size()) throw Error(ErrorCode::kInvalidArgument, "no such demonstration", slot);
  IclContent out = icl;
  out.demos[slot].code = code;
  return out;
}

namespace {

// M(.) of a readout relative to the pre-attack baseline.
double ValueAgainst(const Readout& r, const Readout& baseline) {
  return r.mode == TaskMode::kClassification ? r.ProbabilityOf(baseline.label) : r.mean3;
}

Readout EvaluateAgainst(Evaluator& ev, const IclContent& icl, const Readout& baseline) {
  return ev.Evaluate(icl, baseline.mode == TaskMode::kGeneration ? &baseline.text : nullptr);
}

}  // namespace

double VulScore(Evaluator& ev, const IclContent& icl, std::size_t slot,
                const mutation::VariableSite& var, const Readout& baseline, const Readout* current) {
  if (slot >= icl.demos.size()) throw Error(ErrorCode::kInvalidArgument, "no such demonstration", slot);
  Readout with_var = current ? *current : EvaluateAgainst(ev, icl, baseline);
  std::string ablated = mutation::DeleteOccurrences(icl.demos[slot].code, var);
  if (ablated.empty()) ablated = " ";
  Readout without = EvaluateAgainst(ev, WithDemoCode(icl, slot, ablated), baseline);
  return ValueAgainst(with_var, baseline) - ValueAgainst(without, baseline);
}

AttackOutcome GreedyMutate(modelgw::Gateway& gw, const TaskKind& task, const IclContent& clean,
                           const std::vector<std::vector<VariablePlan>>& plans,
                           const FlipCriterion& criterion, const std::vector<std::string>& labels) {
  if (clean.demos.empty()) throw Error(ErrorCode::kInvalidArgument, "no demonstrations to mutate");
  if (plans.size() != clean.demos.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one variable plan per demonstration required");
  }
  modelgw::Gateway scoped = gw.Scoped();
  Evaluator ev(scoped, task, labels);
  AttackOutcome out;
  out.triggered = true;
  out.bad_demos = clean.demos;
  IclContent current = clean;

  try {
    Readout baseline = ev.Evaluate(clean);
    out.baseline = baseline;
    Readout current_readout = baseline;
    bool flipped_state = false;

    for (std::size_t d = 0; d < clean.demos.size(); ++d) {
      if (plans[d].empty()) {
        out.skips.push_back({d, "", "no eligible variable with substitutes"});
        continue;
      }
      // VUL_SORT on the current transcript state.
      struct Ranked {
        const VariablePlan* plan;
        double score;
      };
      std::vector<Ranked> ranked;
      for (const auto& plan : plans[d]) {
        auto site = mutation::LocateSite(current.demos[d].code, plan.site.name, plan.site.segment,
                                         task.language);
        if (!site) {
          out.skips.push_back({d, plan.site.name, "variable no longer present"});
          continue;
        }
        double s = VulScore(ev, current, d, *site, baseline, &current_readout);
        out.vul_scores.push_back({d, plan.site.name, s});
        ranked.push_back({&plan, s});
      }
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

      for (const auto& rv : ranked) {
        const VariablePlan& plan = *rv.plan;
        auto site = mutation::LocateSite(current.demos[d].code, plan.site.name, plan.site.segment,
                                         task.language);
        if (!site) {
          out.skips.push_back({d, plan.site.name, "variable no longer present"});
          continue;
        }
        std::optional<IclContent> best_icl;
        std::optional<Readout> best_readout;
        double best_potential = 0.0;
        bool flipped_here = false;
        for (const auto& sub : plan.substitutes) {
          mutation::Mutant m;
          try {
            m = mutation::Rename(current.demos[d].code, *site, sub, task.language);
          } catch (const Error& e) {
            out.skips.push_back({d, plan.site.name + "->" + sub, std::string(ErrorCodeName(e.code()))});
            continue;
          }
          IclContent temp = WithDemoCode(current, d, m.code);
          Readout r = EvaluateAgainst(ev, temp, baseline);
          double potential = FlipPotential(baseline, r, criterion);
          bool flip = IsFlip(baseline, r, criterion);
          out.trace.push_back({d, plan.site.name, sub, potential, flip});
          if (flip) {
            current = std::move(temp);
            current_readout = std::move(r);
            flipped_state = true;
            flipped_here = true;
            break;
          }
          if (!best_icl || potential > best_potential) {
            best_icl = std::move(temp);
            best_readout = std::move(r);
            best_potential = potential;
          }
        }
        if (flipped_here) break;  // next demonstration
        if (best_icl) {
          current = std::move(*best_icl);
          current_readout = std::move(*best_readout);
          flipped_state = false;
        }
      }
    }
    out.flipped = flipped_state;
    out.flip_potential = FlipPotential(baseline, current_readout, criterion);
    out.final_readout = current_readout;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBackendUnavailable) throw;
    out.aborted = true;
    out.abort_reason = e.what();
    out.flipped = false;
  }
  out.bad_demos = current.demos;
  out.queries_used = scoped.Counts().ModelQueries();
  return out;
}

std::vector<std::vector<VariablePlan>> PlanVariables(const IclContent& icl, Language lang,
                                                     const substitution::Options& opts,
                                                     modelgw::Gateway& gw,
                                                     retrieval::Embedder& embedder,
                                                     std::vector<Skip>* skips) {
  std::vector<std::vector<VariablePlan>> plans(icl.demos.size());
  auto skip = [&](std::size_t d, std::string var, std::string reason) {
    if (skips) skips->push_back({d, std::move(var), std::move(reason)});
  };
  if (!IsMutable(lang)) {
    for (std::size_t d = 0; d < icl.demos.size(); ++d) skip(d, "", "language has no grammar");
    return plans;
  }
  for (std::size_t d = 0; d < icl.demos.size(); ++d) {
    const std::string& code = icl.demos[d].code;
    std::vector<mutation::VariableSite> sites;
    try {
      sites = mutation::ExtractVariables(code, lang);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParseError) throw;
      skip(d, "", std::string("unparseable: ") + e.what());
      continue;
    }
    for (const auto& site : sites) {
      if (!site.Eligible()) continue;
      try {
        auto set = substitution::BuildSubstituteSet(code, site, lang, opts, gw, embedder);
        VariablePlan plan{site, {}};
        for (const auto& c : set.candidates) plan.substitutes.push_back(c.identifier);
        plans[d].push_back(std::move(plan));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoProposals) throw;
        skip(d, site.name, "no proposals");
      }
    }
  }
  return plans;
}

AttackOutcome RunAttack(modelgw::Gateway& gw, retrieval::Embedder& embedder, const TaskKind& task,
                        const IclContent& clean, const AttackConfig& cfg,
                        const std::vector<std::string>& labels) {
  AttackOutcome out;
  out.bad_demos = clean.demos;
  if (!TriggerFires(cfg.trigger, clean.query_code, clean.demos)) return out;
  if (clean.demos.empty()) {
    out.triggered = true;
    out.skips.push_back({0, "", "zero-shot transcript has no demonstrations"});
    return out;
  }
  std::vector<Skip> plan_skips;
  std::vector<std::vector<VariablePlan>> plans;
  try {
    plans = PlanVariables(clean, task.language, cfg.subs, gw, embedder, &plan_skips);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBackendUnavailable) throw;
    out.triggered = true;
    out.aborted = true;
    out.abort_reason = e.what();
    out.skips = std::move(plan_skips);
    return out;
  }
  out = GreedyMutate(gw, task, clean, plans, cfg.criterion, labels);
  out.skips.insert(out.skips.begin(), plan_skips.begin(), plan_skips.end());
  return out;
}

}  // namespace iclforge::attack

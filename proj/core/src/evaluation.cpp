#include "battdiag/evaluation.hpp"

#include <algorithm>
#include <vector>

#include <json.hpp>

#include "battdiag/error.hpp"

namespace battdiag {

using nlohmann::ordered_json;

namespace {

struct Unit {
  Label truth = Label::Normal;
  double score = 0.0;
  Outcome outcome = Outcome::Normal;
  double detector_score = 0.0;
  Outcome detector_outcome = Outcome::Normal;
};

Outcome most_severe(Outcome a, Outcome b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

ArmSummary summarize(const std::vector<ScoredLabel>& scores, const std::vector<Outcome>& outcomes,
                     const std::vector<Label>& truth, const CostParams& cost) {
  ArmSummary arm;
  const bool both = std::any_of(truth.begin(), truth.end(), [](Label l) { return l == Label::Abnormal; }) &&
                    std::any_of(truth.begin(), truth.end(), [](Label l) { return l == Label::Normal; });
  if (both) arm.auroc = auroc(scores);
  arm.tally = tally_outcomes(outcomes, truth).tally;
  for (WarningPolicy policy : kAllWarningPolicies) {
    PolicyResult r;
    r.rates = detection_rates(arm.tally, policy);
    r.cost = average_cost(r.rates.q_tp, r.rates.q_fp, cost);
    r.errors = error_count(arm.tally, policy);
    arm.policies[policy] = r;
  }
  return arm;
}

ordered_json tally_json(const OutcomeTally& t) {
  ordered_json out;
  for (Label truth : {Label::Abnormal, Label::Normal}) {
    ordered_json row;
    for (Outcome o : {Outcome::Abnormal, Outcome::Warning, Outcome::Normal}) {
      row[std::string(to_string(o))] = t.at(truth, o);
    }
    out[std::string(to_string(truth))] = std::move(row);
  }
  return out;
}

ordered_json arm_json(const ArmSummary& arm) {
  ordered_json out;
  out["auroc"] = arm.auroc ? ordered_json(*arm.auroc) : ordered_json(nullptr);
  out["tally"] = tally_json(arm.tally);
  ordered_json policies;
  for (const auto& [policy, r] : arm.policies) {
    policies[std::string(to_string(policy))] = {{"q_tp", r.rates.q_tp},
                                                {"q_fp", r.rates.q_fp},
                                                {"cost", r.cost},
                                                {"errors", r.errors}};
  }
  out["policies"] = std::move(policies);
  return out;
}

}  // namespace

TallyResult tally_outcomes(std::span<const DiagnosisReport> reports, std::span<const Label> truth,
                           WarningPolicy policy) {
  std::vector<Outcome> predicted;
  predicted.reserve(reports.size());
  for (const auto& r : reports) predicted.push_back(r.result);
  return tally_outcomes(predicted, truth, policy);
}

EvaluationSummary evaluate_reports(std::span<const DiagnosisReport> reports,
                                   const std::map<std::string, Label>& truth,
                                   const EvaluateConfig& config) {
  config.cost.validate();
  EvaluationSummary summary;
  summary.level = config.level;
  summary.cost = config.cost;
  summary.n_reports = reports.size();

  std::vector<Unit> units;
  std::map<std::string, std::size_t> unit_of_vehicle;
  for (const DiagnosisReport& r : reports) {
    const auto it = truth.find(r.vehicle_id);
    if (it == truth.end()) {
      throw ConfigError("no ground-truth label for vehicle '" + r.vehicle_id + "'");
    }
    if (r.escalated) ++summary.escalated;
    if (r.degraded) ++summary.degraded;
    const Outcome detector =
        r.gbdt_probability >= config.threshold ? Outcome::Abnormal : Outcome::Normal;
    if (r.escalated && r.result != detector) ++summary.decisions_changed;

    Unit u{it->second, r.final_probability(), r.result, r.gbdt_probability, detector};
    if (config.level == EvaluationLevel::Segment) {
      units.push_back(u);
      continue;
    }
    auto [slot, inserted] = unit_of_vehicle.emplace(r.vehicle_id, units.size());
    if (inserted) {
      units.push_back(u);
    } else {
      Unit& agg = units[slot->second];
      agg.score = std::max(agg.score, u.score);
      agg.outcome = most_severe(agg.outcome, u.outcome);
      agg.detector_score = std::max(agg.detector_score, u.detector_score);
      agg.detector_outcome = most_severe(agg.detector_outcome, u.detector_outcome);
    }
  }
  summary.n_units = units.size();

  std::vector<ScoredLabel> scores, detector_scores;
  std::vector<Outcome> outcomes, detector_outcomes;
  std::vector<Label> labels;
  for (const Unit& u : units) {
    scores.push_back({u.score, u.truth});
    detector_scores.push_back({u.detector_score, u.truth});
    outcomes.push_back(u.outcome);
    detector_outcomes.push_back(u.detector_outcome);
    labels.push_back(u.truth);
  }
  summary.pipeline = summarize(scores, outcomes, labels, config.cost);
  summary.detector_only = summarize(detector_scores, detector_outcomes, labels, config.cost);
  return summary;
}

std::string summary_to_json(const EvaluationSummary& s) {
  ordered_json doc;
  doc["level"] = s.level == EvaluationLevel::Vehicle ? "vehicle" : "segment";
  doc["n_units"] = s.n_units;
  doc["n_reports"] = s.n_reports;
  doc["escalated"] = s.escalated;
  doc["degraded"] = s.degraded;
  doc["decisions_changed"] = s.decisions_changed;
  doc["cost_params"] = {{"p", s.cost.prevalence},
                        {"c_f", s.cost.missed_fault_cost},
                        {"c_r", s.cost.inspection_cost}};
  doc["auroc"] = s.pipeline.auroc ? ordered_json(*s.pipeline.auroc) : ordered_json(nullptr);
  doc["pipeline"] = arm_json(s.pipeline);
  doc["detector_only"] = arm_json(s.detector_only);
  return doc.dump(2);
}

}  // namespace battdiag

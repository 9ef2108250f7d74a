#include "battdiag/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "battdiag/error.hpp"

namespace battdiag {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Normal: return "Normal";
    case Outcome::Warning: return "Warning";
    case Outcome::Abnormal: return "Abnormal";
  }
  return "Normal";
}

Outcome outcome_from_string(std::string_view text) {
  if (text == "Normal") return Outcome::Normal;
  if (text == "Warning") return Outcome::Warning;
  if (text == "Abnormal") return Outcome::Abnormal;
  throw ParseError("unknown outcome '" + std::string(text) + "'");
}

std::string_view to_string(WarningPolicy policy) {
  switch (policy) {
    case WarningPolicy::WarningAsAbnormal: return "WarningAsAbnormal";
    case WarningPolicy::WarningAsNormal: return "WarningAsNormal";
    case WarningPolicy::SeparateClass: return "SeparateClass";
  }
  return "WarningAsAbnormal";
}

WarningPolicy warning_policy_from_string(std::string_view text) {
  for (WarningPolicy p : kAllWarningPolicies) {
    if (to_string(p) == text) return p;
  }
  throw ConfigError("unknown warning policy '" + std::string(text) + "'");
}

double auroc(std::span<const ScoredLabel> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });

  // Sum of mid-ranks of the positives (1-based ranks).
  double positive_rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (scores[order[k]].label == Label::Abnormal) {
        positive_rank_sum += mid_rank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw ConfigError("AUROC needs both classes present");
  const double u = positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

void CostParams::validate() const {
  if (!(prevalence > 0.0 && prevalence < 1.0)) throw ConfigError("prevalence must lie in (0, 1)");
  if (missed_fault_cost < 0.0 || inspection_cost < 0.0) {
    throw ConfigError("costs must be non-negative");
  }
}

double average_cost(double q_tp, double q_fp, const CostParams& params) {
  const double p = params.prevalence;
  return p * (1.0 - q_tp) * params.missed_fault_cost +
         (p * q_tp + (1.0 - p) * q_fp) * params.inspection_cost;
}

std::size_t OutcomeTally::total(Label truth) const {
  const auto& row = counts[static_cast<std::size_t>(truth)];
  return row[0] + row[1] + row[2];
}

OutcomeTally& OutcomeTally::operator+=(const OutcomeTally& other) {
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t p = 0; p < 3; ++p) counts[t][p] += other.counts[t][p];
  }
  return *this;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

DetectionRates detection_rates(const OutcomeTally& t, WarningPolicy policy) {
  const std::size_t pos_abn = t.at(Label::Abnormal, Outcome::Abnormal);
  const std::size_t pos_warn = t.at(Label::Abnormal, Outcome::Warning);
  const std::size_t pos_norm = t.at(Label::Abnormal, Outcome::Normal);
  const std::size_t neg_abn = t.at(Label::Normal, Outcome::Abnormal);
  const std::size_t neg_warn = t.at(Label::Normal, Outcome::Warning);
  const std::size_t neg_norm = t.at(Label::Normal, Outcome::Normal);
  switch (policy) {
    case WarningPolicy::WarningAsAbnormal:
      return {ratio(pos_abn + pos_warn, t.total(Label::Abnormal)),
              ratio(neg_abn + neg_warn, t.total(Label::Normal))};
    case WarningPolicy::WarningAsNormal:
      return {ratio(pos_abn, t.total(Label::Abnormal)), ratio(neg_abn, t.total(Label::Normal))};
    case WarningPolicy::SeparateClass:
      return {ratio(pos_abn, pos_abn + pos_norm), ratio(neg_abn, neg_abn + neg_norm)};
  }
  return {};
}

std::size_t error_count(const OutcomeTally& t, WarningPolicy policy) {
  std::size_t fn = t.at(Label::Abnormal, Outcome::Normal);
  std::size_t fp = t.at(Label::Normal, Outcome::Abnormal);
  if (policy == WarningPolicy::WarningAsAbnormal) fp += t.at(Label::Normal, Outcome::Warning);
  if (policy == WarningPolicy::WarningAsNormal) fn += t.at(Label::Abnormal, Outcome::Warning);
  return fn + fp;
}

TallyResult tally_outcomes(std::span<const Outcome> predicted, std::span<const Label> truth,
                           WarningPolicy policy) {
  if (predicted.size() != truth.size()) {
    throw ConfigError("tally: " + std::to_string(predicted.size()) + " predictions for " +
                      std::to_string(truth.size()) + " labels");
  }
  TallyResult result;
  for (std::size_t i = 0; i < predicted.size(); ++i) ++result.tally.at(truth[i], predicted[i]);
  result.rates = detection_rates(result.tally, policy);
  return result;
}

}  // namespace battdiag

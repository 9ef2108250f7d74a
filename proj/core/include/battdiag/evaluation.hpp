#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "battdiag/agent.hpp"
#include "battdiag/metrics.hpp"

namespace battdiag {

enum class EvaluationLevel { Vehicle, Segment };

struct EvaluateConfig {
  EvaluationLevel level = EvaluationLevel::Vehicle;
  CostParams cost;
  double threshold = kDefaultThreshold;  // for the detector-only decisions
};

struct PolicyResult {
  DetectionRates rates;
  double cost = 0.0;
  std::size_t errors = 0;
};

struct ArmSummary {
  std::optional<double> auroc;  // absent when only one class is present
  OutcomeTally tally;
  std::map<WarningPolicy, PolicyResult> policies;
};

struct EvaluationSummary {
  EvaluationLevel level = EvaluationLevel::Vehicle;
  std::size_t n_units = 0;
  std::size_t n_reports = 0;
  std::size_t escalated = 0;
  std::size_t degraded = 0;
  std::size_t decisions_changed = 0;  // escalated reports whose outcome differs from the detector
  CostParams cost;
  ArmSummary pipeline;
  ArmSummary detector_only;
};

// Scores reports against per-vehicle truth. At vehicle level a vehicle's
// score is its highest segment probability and its outcome the most severe
// segment outcome. The detector-only arm replays the GBDT probabilities
// through the plain threshold.
EvaluationSummary evaluate_reports(std::span<const DiagnosisReport> reports,
                                   const std::map<std::string, Label>& truth,
                                   const EvaluateConfig& config = {});

std::string summary_to_json(const EvaluationSummary& summary);

// Outcome tally over aligned reports and labels (one entry per report).
TallyResult tally_outcomes(std::span<const DiagnosisReport> reports, std::span<const Label> truth,
                           WarningPolicy policy = WarningPolicy::WarningAsAbnormal);

}  // namespace battdiag

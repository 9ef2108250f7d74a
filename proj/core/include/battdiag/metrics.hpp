#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "battdiag/segment.hpp"

namespace battdiag {

enum class Outcome { Normal, Warning, Abnormal };

std::string_view to_string(Outcome outcome);
Outcome outcome_from_string(std::string_view text);

struct ScoredLabel {
  double score = 0.0;
  Label label = Label::Normal;
};

// Mann-Whitney statistic with ties counted one half. Throws ConfigError when
// either class is absent.
double auroc(std::span<const ScoredLabel> scores);

struct CostParams {
  double prevalence = 0.00038;
  double missed_fault_cost = 5'000'000.0;
  double inspection_cost = 8'000.0;

  void validate() const;
};

// C = p(1 - q_tp) c_f + [p q_tp + (1 - p) q_fp] c_r
double average_cost(double q_tp, double q_fp, const CostParams& params = {});

enum class WarningPolicy { WarningAsAbnormal, WarningAsNormal, SeparateClass };

inline constexpr std::array<WarningPolicy, 3> kAllWarningPolicies = {
    WarningPolicy::WarningAsAbnormal, WarningPolicy::WarningAsNormal,
    WarningPolicy::SeparateClass};

std::string_view to_string(WarningPolicy policy);
WarningPolicy warning_policy_from_string(std::string_view text);

// counts[truth][predicted], truth indexed by Label, predicted by Outcome.
struct OutcomeTally {
  std::array<std::array<std::size_t, 3>, 2> counts{};

  std::size_t& at(Label truth, Outcome predicted) {
    return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  std::size_t at(Label truth, Outcome predicted) const {
    return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  std::size_t total(Label truth) const;

  OutcomeTally& operator+=(const OutcomeTally& other);
};

struct DetectionRates {
  double q_tp = 0.0;
  double q_fp = 0.0;
};

// Warnings count as flagged, as not flagged, or (SeparateClass) are dropped
// from both numerator and denominator. An empty denominator yields 0.
DetectionRates detection_rates(const OutcomeTally& tally, WarningPolicy policy);

// False negatives plus false positives after collapsing warnings.
std::size_t error_count(const OutcomeTally& tally, WarningPolicy policy);

struct TallyResult {
  OutcomeTally tally;
  DetectionRates rates;
};

TallyResult tally_outcomes(std::span<const Outcome> predicted, std::span<const Label> truth,
                           WarningPolicy policy = WarningPolicy::WarningAsAbnormal);

}  // namespace battdiag

#include <algorithm>
#include <sstream>
#include <string>

#include <json.hpp>

#include "battdiag/agent.hpp"
#include "narrative.hpp"
#include "text.hpp"

namespace battdiag {

namespace {

constexpr std::array<std::string_view, kNumFaults> kFaultAdvice = {
    "Remove the vehicle from fast charging and inspect the pack for a self-discharging cell by "
    "tracking per-cell open-circuit voltage decay.",
    "Limit charging power, verify temperature sensors and cooling, and schedule an urgent pack "
    "safety inspection.",
    "Run a capacity test and plan module replacement if capacity is below the service limit.",
    "Balance the pack, locate weak modules, and re-check cell consistency after balancing.",
    "Inspect the cooling loop: coolant level, pump operation, and thermal interface material.",
    "Check BMS firmware, SOC estimation, and current and voltage sensor calibration."};

std::string contributors_sentence(const KnowledgeBase& kb, std::span<const Contribution> top_k) {
  std::ostringstream out;
  out << "Leading contributors:";
  bool first = true;
  for (const Contribution& c : top_k) {
    if (c.weight <= 0.0) continue;
    out << (first ? " " : "; ") << symbol(c.feature) << " (phi " << text::signed_num(c.phi)
        << ", w " << text::num(c.weight) << ", " << kb.interpretations[index(c.feature)] << ")";
    first = false;
  }
  if (first) out << " none (all contributions are zero)";
  out << '.';
  return out.str();
}

std::string candidates_sentence(const std::vector<std::pair<FaultType, double>>& ranked) {
  std::ostringstream out;
  out << "Knowledge mapping ranks";
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
    out << (i == 0 ? " " : ", ") << code(ranked[i].first) << " ("
        << display_name(ranked[i].first) << ", score " << text::num(ranked[i].second) << ")";
  }
  out << '.';
  return out.str();
}

}  // namespace

std::string render_cause(const KnowledgeBase& kb, std::span<const Contribution> top_k,
                         Outcome result) {
  const auto ranked = candidate_faults(kb, top_k);
  std::string cause = contributors_sentence(kb, top_k) + ' ' + candidates_sentence(ranked);
  if (result == Outcome::Normal) {
    cause += " The evidence does not support an active fault.";
  } else {
    cause += " Most likely mechanism: " + std::string(display_name(ranked.front().first)) + '.';
  }
  return cause;
}

std::string render_advice(const KnowledgeBase& kb, std::span<const Contribution> top_k,
                          Outcome result) {
  if (result == Outcome::Normal) return "No action required; continue routine monitoring.";
  const FaultType lead = candidate_faults(kb, top_k).front().first;
  std::string advice(kFaultAdvice[index(lead)]);
  if (result == Outcome::Warning) {
    advice = "Schedule a non-urgent inspection and watch the next charging sessions. " + advice;
  }
  return advice;
}

MockProvider::MockProvider(KnowledgeBase kb, double gate_margin, double threshold)
    : kb_(std::move(kb)), gate_margin_(gate_margin), threshold_(threshold) {}

ProviderResponse MockProvider::complete(const CompletionRequest& request) const {
  const PromptEvidence ev = parse_prompt_evidence(request.prompt);
  // Mechanism coherence: for each fault, the attribution weight on features
  // the knowledge base links strongly to it that push toward Abnormal, minus
  // the strongly linked weight pushing away. The best-supported fault sets
  // the abnormal likelihood; weakly linked features carry no vote.
  double support = 0.0;
  for (FaultType f : kAllFaults) {
    double net = 0.0;
    for (const Contribution& c : ev.top_k) {
      if (kb_.at(c.feature, f) != Strength::Strong) continue;
      net += c.phi > 0.0 ? c.weight : -c.weight;
    }
    support = std::max(support, net);
  }
  support = std::min(support, 1.0);
  constexpr double kDiagnosticMass = 0.95;  // remainder goes to other first tokens
  const double p_abn = kDiagnosticMass * support;
  const double p_norm = kDiagnosticMass * (1.0 - support);

  ProviderResponse response;
  double p_decision = ev.prediction.probability;
  if (request.capture_likelihoods) {
    response.token_likelihoods = std::map<std::string, double>{
        {std::string(kAbnormalToken), std::max(p_abn, kLikelihoodFloor)},
        {std::string(kNormalToken), std::max(p_norm, kLikelihoodFloor)}};
    p_decision = calibrate(response);
  }
  const Outcome result = banded_outcome(p_decision, threshold_, gate_margin_);
  const auto severity = rubric_severity(kb_, ev.top_k, p_decision);

  nlohmann::ordered_json block;
  block["result"] = std::string(to_string(result));
  block["cause"] = render_cause(kb_, ev.top_k, result);
  block["advice"] = render_advice(kb_, ev.top_k, result);
  nlohmann::ordered_json sev = nlohmann::ordered_json::object();
  for (FaultType f : kAllFaults) sev[std::string(code(f))] = severity[index(f)];
  block["severity"] = std::move(sev);

  std::ostringstream out;
  out << to_string(result == Outcome::Normal ? Label::Normal : Label::Abnormal)
      << ". Rule-based assessment at abnormal probability " << text::num(p_decision) << ".\n"
      << "```json\n"
      << block.dump(2) << "\n```\n";
  response.text = out.str();
  return response;
}

}  // namespace battdiag

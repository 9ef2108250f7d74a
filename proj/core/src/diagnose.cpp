#include <string>

#include "battdiag/agent.hpp"
#include "narrative.hpp"

namespace battdiag {

namespace {

Outcome thresholded(double p, double threshold) {
  return p >= threshold ? Outcome::Abnormal : Outcome::Normal;
}

}  // namespace

DiagnosisReport degraded_report(const KnowledgeBase& kb, const Attribution& attr,
                                double gbdt_probability, const DiagnoseConfig& config,
                                const std::string& provider_id, const std::string& reason) {
  DiagnosisReport r;
  r.result = thresholded(gbdt_probability, config.threshold);
  r.cause = "Detector-only report (" + reason + "). " + render_cause(kb, attr.top_k, r.result);
  r.advice = render_advice(kb, attr.top_k, r.result);
  r.severity = rubric_severity(kb, attr.top_k, gbdt_probability);
  r.gbdt_probability = gbdt_probability;
  r.degraded = true;
  r.provider = provider_id;
  r.warnings.push_back("degraded: " + reason);
  return r;
}

DiagnosisReport diagnose(const FeatureVector& x, const TreeEnsemble& model,
                         std::span<const FeatureVector> background, const KnowledgeBase& kb,
                         const ReasoningProvider& provider, const DiagnoseConfig& config) {
  const double p = predict_proba(model, x);
  const Attribution attr = select_top_k(tree_shap(model, x, background), config.top_k);
  const bool escalate =
      refinement_gate(p, config.gate_margin, config.confidence_measure) == GateDecision::Escalate;
  const Prediction prediction{p >= config.threshold ? Label::Abnormal : Label::Normal, p};
  const std::string provider_id = provider.id();

  try {
    const DiagnosticPrompt prompt = build_prompt(kb, prediction, attr);
    const ProviderResponse response = provider.complete({prompt.rendered, escalate});
    ParsedReport parsed = parse_report(response.text);

    DiagnosisReport r;
    r.cause = std::move(parsed.cause);
    r.advice = std::move(parsed.advice);
    r.severity = parsed.severity;
    r.warnings = std::move(parsed.warnings);
    r.gbdt_probability = p;
    r.escalated = escalate;
    r.provider = provider_id;
    if (!escalate) {
      r.result = thresholded(p, config.threshold);
      return r;
    }
    try {
      const double calibrated = calibrate(response);
      r.calibrated_probability = calibrated;
      r.result = banded_outcome(calibrated, config.threshold, config.gate_margin);
    } catch (const NoLikelihoods& e) {
      r.result = parsed.result;
      r.warnings.push_back(std::string("calibration skipped: ") + e.what());
    }
    return r;
  } catch (const std::exception& e) {
    DiagnosisReport r = degraded_report(kb, attr, p, config, provider_id, e.what());
    r.escalated = escalate;
    return r;
  }
}

}  // namespace battdiag

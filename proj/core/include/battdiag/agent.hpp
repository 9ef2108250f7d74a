#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "battdiag/attribution.hpp"
#include "battdiag/error.hpp"
#include "battdiag/gbdt.hpp"
#include "battdiag/knowledge.hpp"
#include "battdiag/metrics.hpp"

namespace battdiag {

// Diagnostic tokens whose likelihoods drive calibration.
inline constexpr std::string_view kAbnormalToken = "Abnormal";
inline constexpr std::string_view kNormalToken = "Normal";

inline constexpr double kLikelihoodFloor = 1e-9;
inline constexpr double kDefaultGateMargin = 0.05;
inline constexpr double kDefaultThreshold = 0.5;

struct Prediction {
  Label label = Label::Normal;
  double probability = 0.5;  // of Abnormal
};

// Rules, then SHAP evidence, then the output template.
struct DiagnosticPrompt {
  std::string rules_section;
  std::string shap_section;
  std::string template_section;
  std::string rendered;
};

inline constexpr std::string_view kRulesHeader = "### RULES";
inline constexpr std::string_view kShapHeader = "### SHAP";
inline constexpr std::string_view kTemplateHeader = "### TEMPLATE";

// Requires attr.top_k to be populated. Numbers use 6 significant digits.
DiagnosticPrompt build_prompt(const KnowledgeBase& kb, const Prediction& prediction,
                              const Attribution& attr);

// Evidence recovered from a rendered prompt. The mock provider reasons only
// over this, so it stays a pure function of the prompt text.
struct PromptEvidence {
  Prediction prediction;
  double base_value = 0.0;
  std::vector<Contribution> top_k;
};

PromptEvidence parse_prompt_evidence(std::string_view prompt);

struct CompletionRequest {
  std::string prompt;
  bool capture_likelihoods = false;
};

struct ProviderResponse {
  std::string text;
  std::optional<std::map<std::string, double>> token_likelihoods;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

// Thread-safe completion backend.
class ReasoningProvider {
 public:
  virtual ~ReasoningProvider() = default;
  virtual ProviderResponse complete(const CompletionRequest& request) const = 0;
  virtual std::string id() const = 0;
};

class NoLikelihoods : public Error {
 public:
  using Error::Error;
};

// P_abn / (P_abn + P_norm). A present zero likelihood is clamped to 1e-9;
// a missing token throws NoLikelihoods.
double calibrate(const ProviderResponse& response);

enum class GateDecision { Accept, Escalate };

// How "prediction confidence" is measured for the refinement gate.
enum class ConfidenceMeasure {
  BoundaryDistance,  // escalate iff |p - 0.5| < threshold
  TailMass,          // escalate iff min(p, 1 - p) >= threshold
};

GateDecision refinement_gate(double gbdt_probability, double margin_threshold = kDefaultGateMargin,
                             ConfidenceMeasure measure = ConfidenceMeasure::BoundaryDistance);

struct DiagnosisReport {
  std::string vehicle_id;
  std::size_t segment_index = 0;

  Outcome result = Outcome::Normal;
  std::string cause;
  std::string advice;
  std::array<double, kNumFaults> severity{};
  std::optional<double> calibrated_probability;

  double gbdt_probability = 0.5;
  bool escalated = false;
  bool degraded = false;
  std::string provider;
  std::vector<std::string> warnings;

  // Probability of Abnormal after refinement.
  double final_probability() const { return calibrated_probability.value_or(gbdt_probability); }
};

// Fields extracted from a completion's fenced JSON block.
struct ParsedReport {
  Outcome result = Outcome::Normal;
  std::string cause;
  std::string advice;
  std::array<double, kNumFaults> severity{};
  std::vector<std::string> warnings;
};

class ParseFailure : public ParseError {
 public:
  using ParseError::ParseError;
};

ParsedReport parse_report(std::string_view text);

// Three-way decision: Abnormal at or above threshold + margin, Normal below
// threshold - margin, Warning strictly inside the band.
Outcome banded_outcome(double probability, double threshold, double margin);

// severity(f) = min(5, round(5 * p * score(f) / 2)) over candidate_faults.
std::array<double, kNumFaults> rubric_severity(const KnowledgeBase& kb,
                                               std::span<const Contribution> top_k,
                                               double abnormal_probability);

// Deterministic offline reasoner following a fixed rubric over the evidence
// in the prompt. The abnormal likelihood is the net attribution weight that
// features strongly tied to the best-supported fault put toward Abnormal.
class MockProvider final : public ReasoningProvider {
 public:
  explicit MockProvider(KnowledgeBase kb, double gate_margin = kDefaultGateMargin,
                        double threshold = kDefaultThreshold);

  ProviderResponse complete(const CompletionRequest& request) const override;
  std::string id() const override { return "mock"; }

 private:
  KnowledgeBase kb_;
  double gate_margin_;
  double threshold_;
};

// HTTP JSON completion endpoint.
//
// Request body:  {"model", "prompt", "temperature": 0,
//                 "logprob_tokens": ["Abnormal", "Normal"]}   (only on capture)
// Response body: {"text": "...", "token_likelihoods": {"Abnormal": p, ...}}
// The token, if configured, is sent as "Authorization: Bearer <token>".
struct HttpProviderConfig {
  std::string url = "http://127.0.0.1:8080/v1/complete";
  std::string model = "reasoner";
  std::string auth_token_env = "BATTDIAG_API_TOKEN";
  std::chrono::seconds timeout{60};
};

class HttpProvider final : public ReasoningProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  ProviderResponse complete(const CompletionRequest& request) const override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpProviderConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

struct DiagnoseConfig {
  double gate_margin = kDefaultGateMargin;
  ConfidenceMeasure confidence_measure = ConfidenceMeasure::BoundaryDistance;
  double threshold = kDefaultThreshold;
  std::size_t top_k = kDefaultTopK;
};

// Predict, attribute, gate, then ask the provider. Accepted samples keep the
// GBDT decision and take cause/advice/severity from a report-only call.
// Escalated samples request likelihoods and the calibrated probability sets
// the three-way result. Any provider or parse failure yields a degraded
// GBDT-only report; this function does not throw for valid inputs.
DiagnosisReport diagnose(const FeatureVector& x, const TreeEnsemble& model,
                         std::span<const FeatureVector> background, const KnowledgeBase& kb,
                         const ReasoningProvider& provider, const DiagnoseConfig& config = {});

// Report rendered from the GBDT and knowledge base alone.
DiagnosisReport degraded_report(const KnowledgeBase& kb, const Attribution& attr,
                                double gbdt_probability, const DiagnoseConfig& config,
                                const std::string& provider_id, const std::string& reason);

std::string report_to_json(const DiagnosisReport& report);
DiagnosisReport report_from_json(const std::string& line);

}  // namespace battdiag

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "battdiag/agent.hpp"
#include "text.hpp"

namespace battdiag {

using nlohmann::json;
using nlohmann::ordered_json;

double calibrate(const ProviderResponse& response) {
  if (!response.token_likelihoods) throw NoLikelihoods("provider returned no token likelihoods");
  const auto& lk = *response.token_likelihoods;
  const auto abn = lk.find(std::string(kAbnormalToken));
  const auto norm = lk.find(std::string(kNormalToken));
  if (abn == lk.end() || norm == lk.end()) {
    throw NoLikelihoods("token likelihoods lack '" +
                        std::string(abn == lk.end() ? kAbnormalToken : kNormalToken) + "'");
  }
  const double p_abn = std::max(abn->second, kLikelihoodFloor);
  const double p_norm = std::max(norm->second, kLikelihoodFloor);
  return p_abn / (p_abn + p_norm);
}

GateDecision refinement_gate(double p, double margin_threshold, ConfidenceMeasure measure) {
  const bool escalate = measure == ConfidenceMeasure::BoundaryDistance
                            ? std::abs(p - 0.5) < margin_threshold
                            : std::min(p, 1.0 - p) >= margin_threshold;
  return escalate ? GateDecision::Escalate : GateDecision::Accept;
}

Outcome banded_outcome(double probability, double threshold, double margin) {
  if (probability >= threshold + margin) return Outcome::Abnormal;
  if (probability <= threshold - margin) return Outcome::Normal;
  return Outcome::Warning;
}

std::array<double, kNumFaults> rubric_severity(const KnowledgeBase& kb,
                                               std::span<const Contribution> top_k,
                                               double abnormal_probability) {
  std::array<double, kNumFaults> severity{};
  for (const auto& [fault, score] : candidate_faults(kb, top_k)) {
    const double scaled = 5.0 * abnormal_probability * score / kStrongScore;
    severity[index(fault)] = std::min(5.0, static_cast<double>(std::lround(scaled)));
  }
  return severity;
}

namespace {

std::string_view fenced_block(std::string_view text) {
  auto open = text.find("```json");
  std::size_t body_start = 0;
  if (open != std::string_view::npos) {
    body_start = open + 7;
  } else {
    // Any fence whose body starts with '{'.
    for (open = text.find("```"); open != std::string_view::npos;
         open = text.find("```", open + 3)) {
      auto k = open + 3;
      while (k < text.size() && (text[k] == '\n' || text[k] == '\r' || text[k] == ' ')) ++k;
      if (k < text.size() && text[k] == '{') {
        body_start = open + 3;
        break;
      }
    }
    if (open == std::string_view::npos) throw ParseFailure("completion has no fenced JSON block");
  }
  const auto close = text.find("```", body_start);
  if (close == std::string_view::npos) throw ParseFailure("fenced JSON block is not closed");
  return text.substr(body_start, close - body_start);
}

}  // namespace

ParsedReport parse_report(std::string_view text) {
  const std::string_view block = fenced_block(text);
  json doc;
  try {
    doc = json::parse(block);
  } catch (const json::exception& e) {
    throw ParseFailure(std::string("report block is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseFailure("report block must be a JSON object");

  ParsedReport r;
  try {
    if (!doc.contains("result") || !doc["result"].is_string()) {
      throw ParseFailure("report block lacks a string \"result\"");
    }
    r.result = outcome_from_string(doc["result"].get<std::string>());
    if (doc.contains("cause")) r.cause = doc["cause"].get<std::string>();
    if (doc.contains("advice")) r.advice = doc["advice"].get<std::string>();
    if (doc.contains("severity")) {
      const json& sev = doc["severity"];
      if (!sev.is_object()) throw ParseFailure("\"severity\" must be an object");
      for (FaultType f : kAllFaults) {
        const std::string c(code(f));
        if (!sev.contains(c)) continue;
        if (!sev[c].is_number()) throw ParseFailure("severity " + c + " is not a number");
        double v = sev[c].get<double>();
        if (!std::isfinite(v) || v < 0.0 || v > 5.0) {
          const double clamped = std::isfinite(v) ? std::clamp(v, 0.0, 5.0) : 0.0;
          r.warnings.push_back("severity " + c + "=" + text::num(v) + " clamped to " +
                               text::num(clamped));
          v = clamped;
        }
        r.severity[index(f)] = v;
      }
    }
  } catch (const ParseFailure&) {
    throw;
  } catch (const Error& e) {
    throw ParseFailure(e.what());
  } catch (const json::exception& e) {
    throw ParseFailure(std::string("report block: ") + e.what());
  }
  return r;
}

std::string report_to_json(const DiagnosisReport& r) {
  ordered_json severity = ordered_json::object();
  for (FaultType f : kAllFaults) severity[std::string(code(f))] = r.severity[index(f)];
  ordered_json doc;
  doc["vehicle_id"] = r.vehicle_id;
  doc["segment_index"] = r.segment_index;
  doc["result"] = std::string(to_string(r.result));
  doc["cause"] = r.cause;
  doc["advice"] = r.advice;
  doc["severity"] = std::move(severity);
  doc["calibrated_probability"] =
      r.calibrated_probability ? ordered_json(*r.calibrated_probability) : ordered_json(nullptr);
  doc["provenance"] = {{"gbdt_probability", r.gbdt_probability},
                       {"escalated", r.escalated},
                       {"degraded", r.degraded},
                       {"provider", r.provider}};
  doc["warnings"] = r.warnings;
  return doc.dump();
}

DiagnosisReport report_from_json(const std::string& line) {
  try {
    const json doc = json::parse(line);
    DiagnosisReport r;
    r.vehicle_id = doc.value("vehicle_id", std::string());
    r.segment_index = doc.value("segment_index", std::size_t{0});
    r.result = outcome_from_string(doc.at("result").get<std::string>());
    r.cause = doc.value("cause", std::string());
    r.advice = doc.value("advice", std::string());
    if (doc.contains("severity")) {
      for (FaultType f : kAllFaults) {
        r.severity[index(f)] = doc["severity"].value(std::string(code(f)), 0.0);
      }
    }
    if (doc.contains("calibrated_probability") && !doc["calibrated_probability"].is_null()) {
      r.calibrated_probability = doc["calibrated_probability"].get<double>();
    }
    const json& prov = doc.at("provenance");
    r.gbdt_probability = prov.at("gbdt_probability").get<double>();
    r.escalated = prov.value("escalated", false);
    r.degraded = prov.value("degraded", false);
    r.provider = prov.value("provider", std::string());
    if (doc.contains("warnings")) r.warnings = doc["warnings"].get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report line: ") + e.what());
  }
}

}  // namespace battdiag

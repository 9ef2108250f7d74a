#include <charconv>
#include <sstream>
#include <string>

#include "battdiag/agent.hpp"
#include "text.hpp"

namespace battdiag {

namespace {

std::string fault_list(const KnowledgeBase& kb, Feature f, Strength wanted) {
  std::string out;
  for (FaultType fault : kAllFaults) {
    if (kb.at(f, fault) != wanted) continue;
    if (!out.empty()) out += ", ";
    out += code(fault);
  }
  return out.empty() ? "none" : out;
}

std::string render_rules(const KnowledgeBase& kb) {
  std::ostringstream out;
  out << kRulesHeader << '\n'
      << "You are a battery fault diagnosis agent. Base every statement on the detector "
         "evidence and the mechanism knowledge below.\n"
      << "Knowledge base version: " << kb.version << '\n'
      << "Fault types:";
  for (FaultType f : kAllFaults) out << ' ' << code(f) << " = " << display_name(f) << ';';
  out << '\n' << "Feature knowledge (symbol: interpretation | strong | weak | reading):\n";
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const Feature f = feature_at(i);
    out << "- " << symbol(f) << ": " << kb.interpretations[i]
        << " | strong: " << fault_list(kb, f, Strength::Strong)
        << " | weak: " << fault_list(kb, f, Strength::Weak) << " | " << kb.direction_hints[i]
        << '\n';
  }
  out << "Contributions phi are log-odds shares of the detector score; positive phi pushes "
         "toward Abnormal. w = |phi| / sum |phi| over all ten features.\n";
  return out.str();
}

std::string render_shap(const KnowledgeBase& kb, const Prediction& prediction,
                        const Attribution& attr) {
  std::ostringstream out;
  out << kShapHeader << '\n'
      << "prediction: " << to_string(prediction.label) << '\n'
      << "probability_abnormal: " << text::num(prediction.probability) << '\n'
      << "base_value: " << text::num(attr.base_value) << '\n'
      << "top_k: " << attr.top_k.size() << '\n';
  std::size_t rank = 1;
  for (const Contribution& c : attr.top_k) {
    out << rank++ << ". " << symbol(c.feature) << " phi=" << text::signed_num(c.phi)
        << " w=" << text::num(c.weight) << " | " << kb.interpretations[index(c.feature)] << '\n';
  }
  return out.str();
}

std::string render_template() {
  std::ostringstream out;
  out << kTemplateHeader << '\n'
      << "Write a short analysis, then exactly one fenced JSON block:\n"
      << "```json\n"
      << "{\"result\": \"Normal\" | \"Warning\" | \"Abnormal\",\n"
      << " \"cause\": \"root cause citing the contributing features and fault types\",\n"
      << " \"advice\": \"maintenance recommendation\",\n"
      << " \"severity\": {\"ISC\": 0-5, \"TR\": 0-5, \"CF\": 0-5, \"CD\": 0-5, \"TM\": 0-5, "
         "\"BMS\": 0-5}}\n"
      << "```\n"
      << "Use \"Warning\" for an emerging fault that has not reached a critical level. The "
         "first token of your answer must be Abnormal or Normal.\n";
  return out.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("prompt: malformed number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

DiagnosticPrompt build_prompt(const KnowledgeBase& kb, const Prediction& prediction,
                              const Attribution& attr) {
  DiagnosticPrompt p;
  p.rules_section = render_rules(kb);
  p.shap_section = render_shap(kb, prediction, attr);
  p.template_section = render_template();
  p.rendered = p.rules_section + '\n' + p.shap_section + '\n' + p.template_section;
  return p;
}

PromptEvidence parse_prompt_evidence(std::string_view prompt) {
  const auto begin = prompt.find(kShapHeader);
  if (begin == std::string_view::npos) throw ParseError("prompt: no SHAP section");
  auto end = prompt.find(kTemplateHeader, begin);
  if (end == std::string_view::npos) end = prompt.size();
  std::string_view body = prompt.substr(begin, end - begin);

  PromptEvidence ev;
  bool have_probability = false;
  while (!body.empty()) {
    const auto nl = body.find('\n');
    const std::string_view line = trim(body.substr(0, nl));
    body = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);

    auto value_after = [&](std::string_view key) -> std::optional<std::string_view> {
      if (line.substr(0, key.size()) == key) return trim(line.substr(key.size()));
      return std::nullopt;
    };
    if (auto v = value_after("prediction:")) {
      ev.prediction.label = label_from_string(*v);
    } else if (auto v = value_after("probability_abnormal:")) {
      ev.prediction.probability = to_double(*v);
      have_probability = true;
    } else if (auto v = value_after("base_value:")) {
      ev.base_value = to_double(*v);
    } else if (!line.empty() && line.front() >= '0' && line.front() <= '9') {
      // "<rank>. <symbol> phi=<x> w=<y> | <interpretation>"
      const auto dot = line.find(". ");
      const auto phi_at = line.find(" phi=");
      const auto w_at = line.find(" w=");
      const auto bar = line.find(" | ");
      if (dot == std::string_view::npos || phi_at == std::string_view::npos ||
          w_at == std::string_view::npos) {
        continue;
      }
      const auto sym = line.substr(dot + 2, phi_at - dot - 2);
      const auto feature = try_feature_from_symbol(sym);
      if (!feature) throw ParseError("prompt: unknown feature '" + std::string(sym) + "'");
      const double phi = to_double(line.substr(phi_at + 5, w_at - phi_at - 5));
      const double w = to_double(line.substr(w_at + 3, bar == std::string_view::npos
                                                             ? std::string_view::npos
                                                             : bar - w_at - 3));
      ev.top_k.push_back({*feature, phi, w});
    }
  }
  if (!have_probability) throw ParseError("prompt: SHAP section lacks probability_abnormal");
  return ev;
}

}  // namespace battdiag

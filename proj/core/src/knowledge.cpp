#include "battdiag/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "battdiag/error.hpp"

namespace battdiag {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kNumFaults> kCodes = {"ISC", "TR", "CF", "CD", "TM", "BMS"};
constexpr std::array<std::string_view, kNumFaults> kNames = {
    "Internal Short Circuit", "Thermal Runaway",   "Capacity Fade",
    "Consistency Degradation", "Thermal Management", "BMS Fault"};

// Feature-fault correlation matrix, version 1.
constexpr std::string_view kDefaultKnowledge = R"json({
  "version": "1",
  "features": {
    "f_cyc": {
      "interpretation": "Cumulative charge-discharge cycles",
      "direction": "High counts point to ageing: capacity loss and rising internal resistance.",
      "faults": {"ISC": "weak", "TR": "weak", "CF": "strong", "CD": "strong", "TM": "weak", "BMS": "weak"}
    },
    "f_cc": {
      "interpretation": "CC-phase ratio; degradation indicator",
      "direction": "Low values mean the CV phase has grown, a sign of polarization and reduced charge acceptance.",
      "faults": {"ISC": "weak", "TR": "weak", "CF": "strong", "CD": "weak", "TM": "weak", "BMS": "strong"}
    },
    "f_soc": {
      "interpretation": "Maximum SOC; overcharge risk",
      "direction": "Values close to 100% stress electrode materials; above-limit values suggest overcharge or SOC estimation error.",
      "faults": {"ISC": "weak", "TR": "strong", "CF": "strong", "CD": "weak", "TM": "weak", "BMS": "strong"}
    },
    "f_vr": {
      "interpretation": "Pack-to-cell voltage ratio",
      "direction": "Near 1 the cells track each other; lower values mean some cells sit well below the highest cell.",
      "faults": {"ISC": "strong", "TR": "weak", "CF": "weak", "CD": "strong", "TM": "weak", "BMS": "strong"}
    },
    "f_corr": {
      "interpretation": "Inter-cell voltage correlation",
      "direction": "Low values mean a cell evolves out of step with the pack, typical of a local defect or cell inconsistency.",
      "faults": {"ISC": "strong", "TR": "weak", "CF": "strong", "CD": "strong", "TM": "weak", "BMS": "weak"}
    },
    "f_v0": {
      "interpretation": "Initial minimum cell voltage",
      "direction": "A low onset voltage flags a weak or self-discharging cell.",
      "faults": {"ISC": "strong", "TR": "weak", "CF": "strong", "CD": "strong", "TM": "weak", "BMS": "weak"}
    },
    "f_beta": {
      "interpretation": "Voltage slope over time",
      "direction": "An unusually steep slope indicates lost capacity or a charging-control anomaly.",
      "faults": {"ISC": "weak", "TR": "weak", "CF": "strong", "CD": "weak", "TM": "weak", "BMS": "strong"}
    },
    "f_dT": {
      "interpretation": "Maximum temperature difference",
      "direction": "Large spreads reveal uneven heat distribution or a localized hotspot.",
      "faults": {"ISC": "strong", "TR": "strong", "CF": "weak", "CD": "weak", "TM": "strong", "BMS": "weak"}
    },
    "f_dTdt": {
      "interpretation": "Maximum temperature rate",
      "direction": "A high peak heating rate signals abnormal heat generation or poor heat removal.",
      "faults": {"ISC": "weak", "TR": "strong", "CF": "weak", "CD": "weak", "TM": "strong", "BMS": "weak"}
    },
    "f_Tend": {
      "interpretation": "Terminal temperature",
      "direction": "A hot pack at the end of charging has accumulated excess heat.",
      "faults": {"ISC": "weak", "TR": "strong", "CF": "weak", "CD": "weak", "TM": "strong", "BMS": "weak"}
    }
  }
})json";

Strength strength_from_string(const std::string& s, const std::string& where) {
  if (s == "strong") return Strength::Strong;
  if (s == "weak") return Strength::Weak;
  throw ParseError("knowledge base: " + where + ": expected \"strong\" or \"weak\", got \"" + s +
                   "\"");
}

}  // namespace

std::string_view code(FaultType fault) { return kCodes[index(fault)]; }
std::string_view display_name(FaultType fault) { return kNames[index(fault)]; }

FaultType fault_from_code(std::string_view text) {
  for (std::size_t i = 0; i < kNumFaults; ++i) {
    if (kCodes[i] == text) return kAllFaults[i];
  }
  throw ConfigError("unknown fault type '" + std::string(text) + "'");
}

std::string_view default_knowledge_json() { return kDefaultKnowledge; }

KnowledgeBase knowledge_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("knowledge base: ") + e.what());
  }
  KnowledgeBase kb;
  try {
    kb.version = doc.value("version", std::string("unversioned"));
    const json& features = doc.at("features");
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      const std::string sym(symbol(feature_at(i)));
      if (!features.contains(sym)) throw ParseError("knowledge base: missing feature " + sym);
      const json& row = features.at(sym);
      kb.interpretations[i] = row.at("interpretation").get<std::string>();
      kb.direction_hints[i] = row.value("direction", std::string());
      const json& faults = row.at("faults");
      for (FaultType f : kAllFaults) {
        const std::string c(code(f));
        if (!faults.contains(c)) {
          throw ParseError("knowledge base: " + sym + " is missing fault column " + c);
        }
        kb.correlation[i][index(f)] = strength_from_string(faults.at(c).get<std::string>(),
                                                           sym + "/" + c);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("knowledge base: ") + e.what());
  }
  return kb;
}

const KnowledgeBase& default_knowledge_base() {
  static const KnowledgeBase kb = knowledge_from_json(std::string(kDefaultKnowledge));
  return kb;
}

KnowledgeBase load_knowledge(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open knowledge base '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return knowledge_from_json(buf.str());
}

Strength lookup(const KnowledgeBase& kb, std::string_view feature_symbol, FaultType fault) {
  return kb.at(feature_from_symbol(feature_symbol), fault);
}

std::string correlation_code(const KnowledgeBase& kb) {
  std::string out;
  out.reserve(kNumFeatures * kNumFaults);
  for (const auto& row : kb.correlation) {
    for (Strength s : row) out += s == Strength::Strong ? 'S' : 'W';
  }
  return out;
}

std::vector<std::pair<FaultType, double>> candidate_faults(const KnowledgeBase& kb,
                                                           std::span<const Contribution> top_k) {
  std::vector<std::pair<FaultType, double>> scores;
  for (FaultType f : kAllFaults) {
    double s = 0.0;
    for (const Contribution& c : top_k) {
      s += (kb.at(c.feature, f) == Strength::Strong ? kStrongScore : kWeakScore) * c.weight;
    }
    scores.emplace_back(f, s);
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return scores;
}

}  // namespace battdiag

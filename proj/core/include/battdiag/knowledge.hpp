#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "battdiag/attribution.hpp"
#include "battdiag/features.hpp"

namespace battdiag {

inline constexpr std::size_t kNumFaults = 6;

enum class FaultType : std::size_t { ISC = 0, TR, CF, CD, TM, BMS };

inline constexpr std::array<FaultType, kNumFaults> kAllFaults = {
    FaultType::ISC, FaultType::TR, FaultType::CF, FaultType::CD, FaultType::TM, FaultType::BMS};

constexpr std::size_t index(FaultType f) noexcept { return static_cast<std::size_t>(f); }

std::string_view code(FaultType fault);          // "ISC"
std::string_view display_name(FaultType fault);  // "Internal Short Circuit"
FaultType fault_from_code(std::string_view code);

enum class Strength { Weak, Strong };

struct KnowledgeBase {
  std::string version;
  std::array<std::string, kNumFeatures> interpretations;
  std::array<std::string, kNumFeatures> direction_hints;
  std::array<std::array<Strength, kNumFaults>, kNumFeatures> correlation{};

  Strength at(Feature feature, FaultType fault) const {
    return correlation[index(feature)][index(fault)];
  }
};

// The bundled feature-fault knowledge base.
const KnowledgeBase& default_knowledge_base();
std::string_view default_knowledge_json();

// Parses a knowledge document with the same schema as the bundled one.
// Every feature row and fault column must be present.
KnowledgeBase knowledge_from_json(const std::string& text);
KnowledgeBase load_knowledge(const std::filesystem::path& path);

// Throws ConfigError for an unknown feature symbol.
Strength lookup(const KnowledgeBase& kb, std::string_view feature_symbol, FaultType fault);

// Row-major 60-character rendering ('S' strong, 'W' weak), features in
// canonical order and faults in enum order.
std::string correlation_code(const KnowledgeBase& kb);

// score(fault) = sum over contributions of (2 if Strong else 1) * weight,
// sorted descending; equal scores keep enum order.
std::vector<std::pair<FaultType, double>> candidate_faults(
    const KnowledgeBase& kb, std::span<const Contribution> top_k);

inline constexpr double kStrongScore = 2.0;
inline constexpr double kWeakScore = 1.0;

}  // namespace battdiag

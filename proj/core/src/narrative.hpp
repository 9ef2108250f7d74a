#pragma once

#include <span>
#include <string>

#include "battdiag/agent.hpp"

namespace battdiag {

// Cause and advice prose shared by the mock provider and degraded reports.
std::string render_cause(const KnowledgeBase& kb, std::span<const Contribution> top_k,
                         Outcome result);
std::string render_advice(const KnowledgeBase& kb, std::span<const Contribution> top_k,
                          Outcome result);

}  // namespace battdiag

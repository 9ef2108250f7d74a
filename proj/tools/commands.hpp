#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "battdiag/agent.hpp"
#include "battdiag/evaluation.hpp"
#include "battdiag/features.hpp"
#include "battdiag/gbdt.hpp"

namespace battdiag::cli {

enum ExitCode : int {
  kOk = 0,
  kStageFailure = 1,
  kUsageError = 2,
  kConfigError = 3,
  kDataError = 4,
};

enum class ProviderKind { Mock, Http };

struct PipelineConfig {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> kb_path;

  double gate_margin = kDefaultGateMargin;
  ConfidenceMeasure gate_measure = ConfidenceMeasure::BoundaryDistance;
  std::size_t top_k = kDefaultTopK;
  double threshold = kDefaultThreshold;
  double validation_fraction = 0.3;
  std::uint64_t seed = 7;
  unsigned jobs = 1;

  ProviderKind provider = ProviderKind::Mock;
  HttpProviderConfig http;

  PhaseDetectionParams phase;
  TrainConfig train;
  EvaluateConfig evaluate;
};

// Parses argv and runs one sub-command. Errors are reported on stderr as
// "battdiag: [stage] message" and mapped to an ExitCode.
int run_cli(int argc, const char* const* argv);
// Arguments after the program name.
int run_cli(const std::vector<std::string>& args);

// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& data);

}  // namespace battdiag::cli

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace battdiag {

enum class Label { Normal, Abnormal };

std::string_view to_string(Label label);
Label label_from_string(std::string_view text);

// One charging cycle: synchronously sampled multichannel telemetry.
//
// Channel layout is sample-major for the scalar channels and
// channel-major for the matrices: cell_voltages[c][k] is cell c at sample k.
struct ChargingSegment {
  std::string vehicle_id;
  std::size_t segment_index = 0;

  std::vector<double> timestamps;    // s, strictly increasing
  std::vector<double> pack_voltage;  // V
  std::vector<double> current;       // A, charging positive
  std::vector<double> soc;           // %

  std::vector<std::vector<double>> cell_voltages;  // [n_cells][N] V
  std::vector<std::vector<double>> temperatures;   // [n_probes][N] degC

  std::optional<double> cycle_count;
  std::optional<Label> label;

  std::size_t n_samples() const noexcept { return timestamps.size(); }
  std::size_t n_cells() const noexcept { return cell_voltages.size(); }
  std::size_t n_probes() const noexcept { return temperatures.size(); }

  // Cumulative cycle count, falling back to the ordinal segment index.
  double cycles() const noexcept {
    return cycle_count.value_or(static_cast<double>(segment_index));
  }
};

inline constexpr std::size_t kMinSamples = 8;
inline constexpr double kSocTolerance = 0.5;

// Invariant names, as reported by ValidationError::invariant().
namespace invariant {
inline constexpr std::string_view kMinLength = "N_samples >= 8";
inline constexpr std::string_view kEqualLengths = "all channel lengths equal N_samples";
inline constexpr std::string_view kHasCells = "n_cells >= 1";
inline constexpr std::string_view kHasProbes = "n_probes >= 1";
inline constexpr std::string_view kCellVoltageRange = "cell voltages in (0, 6) V";
inline constexpr std::string_view kTemperatureRange = "temperatures in (-40, 150) degC";
inline constexpr std::string_view kSocRange = "soc in [0, 100]";
inline constexpr std::string_view kSocMonotonic = "soc monotonic non-decreasing";
inline constexpr std::string_view kTimestamps = "timestamps strictly increasing";
inline constexpr std::string_view kFinite = "all samples finite";
}  // namespace invariant

// Throws ValidationError on the first violated invariant.
void validate(const ChargingSegment& segment);

struct FleetDataset {
  std::vector<ChargingSegment> segments;
  std::map<std::string, Label> vehicle_labels;

  std::vector<std::string> vehicle_ids() const;
};

// Checks label coverage and per-vehicle label consistency, then every
// segment's own invariants.
void validate(const FleetDataset& dataset);

}  // namespace battdiag

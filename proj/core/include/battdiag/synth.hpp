#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "battdiag/knowledge.hpp"
#include "battdiag/segment.hpp"

namespace battdiag {

struct FleetSpec {
  std::size_t n_vehicles = 60;
  double abnormal_fraction = 0.35;
  std::map<FaultType, double> fault_mix = {
      {FaultType::ISC, 0.30}, {FaultType::TR, 0.15}, {FaultType::CF, 0.15},
      {FaultType::CD, 0.15},  {FaultType::TM, 0.15}, {FaultType::BMS, 0.10}};
  std::size_t segments_per_vehicle = 20;
  std::size_t samples_per_segment = 240;
  std::size_t n_cells = 12;
  std::size_t n_probes = 4;
  double voltage_noise = 0.001;     // V
  double temperature_noise = 0.05;  // degC
  std::uint64_t seed = 7;

  void validate() const;
};

FleetSpec fleet_spec_from_json(const std::string& text);
std::string fleet_spec_to_json(const FleetSpec& spec);

struct SyntheticFleet {
  FleetDataset dataset;
  std::map<std::string, std::optional<FaultType>> injected;  // vehicle -> fault
};

// Healthy vehicles follow a CC-CV profile: linear voltage ramp to a plateau,
// constant then exponentially decaying current, current-driven heating.
// Abnormal vehicles carry one fault whose severity grows over the vehicle's
// segment history, perturbing the channels behind that fault's strongly
// correlated features. Deterministic per seed.
SyntheticFleet generate_fleet(const FleetSpec& spec);

// One segment with a given fault at severity in [0, 1]; severity 0 or no
// fault gives a healthy segment.
ChargingSegment synthesize_segment(const FleetSpec& spec, const std::string& vehicle_id,
                                   std::size_t segment_index, std::optional<FaultType> fault,
                                   double severity, std::uint64_t seed);

}  // namespace battdiag

#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "battdiag/segment.hpp"

namespace battdiag {

struct SplitAssignment {
  std::set<std::string> train_vehicles;
  std::set<std::string> validation_vehicles;

  bool is_validation(const std::string& vehicle_id) const {
    return validation_vehicles.count(vehicle_id) != 0;
  }
};

// Stratified vehicle-level split. Each label class contributes
// round(fraction * n_class) vehicles to validation, clamped to [1, n_class-1]
// when the class has at least two vehicles.
SplitAssignment partition_by_vehicle(const FleetDataset& dataset, double validation_fraction,
                                     std::uint64_t seed);

}  // namespace battdiag

#include "battdiag/split.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "battdiag/error.hpp"
#include "battdiag/rng.hpp"

namespace battdiag {

SplitAssignment partition_by_vehicle(const FleetDataset& dataset, double validation_fraction,
                                     std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
  std::vector<std::string> by_class[2];
  for (const auto& [id, label] : dataset.vehicle_labels) {
    by_class[static_cast<int>(label)].push_back(id);  // map order: sorted ids
  }
  if (dataset.vehicle_labels.size() < 2) throw ConfigError("need at least two vehicles to split");
  if (by_class[0].empty() || by_class[1].empty()) {
    throw ConfigError("both Normal and Abnormal vehicles are required to split");
  }

  SplitAssignment split;
  Rng rng(mix_seed(seed));
  for (auto& ids : by_class) {
    rng.shuffle(ids.begin(), ids.end());
    const auto n = static_cast<long>(ids.size());
    long n_val = std::lround(validation_fraction * static_cast<double>(n));
    if (n >= 2) n_val = std::clamp(n_val, 1L, n - 1);
    for (long i = 0; i < n; ++i) {
      (i < n_val ? split.validation_vehicles : split.train_vehicles).insert(ids[i]);
    }
  }
  if (split.validation_vehicles.empty() || split.train_vehicles.empty()) {
    throw ConfigError("validation fraction " + std::to_string(validation_fraction) +
                      " leaves a split empty");
  }
  return split;
}

}  // namespace battdiag

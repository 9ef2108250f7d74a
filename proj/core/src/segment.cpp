#include "battdiag/segment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "battdiag/error.hpp"

namespace battdiag {

std::string_view to_string(Label label) {
  return label == Label::Abnormal ? "Abnormal" : "Normal";
}

Label label_from_string(std::string_view text) {
  if (text == "Normal") return Label::Normal;
  if (text == "Abnormal") return Label::Abnormal;
  throw ParseError("unknown label '" + std::string(text) + "' (expected Normal or Abnormal)");
}

namespace {

[[noreturn]] void fail(std::string_view name, const ChargingSegment& s, const std::string& detail) {
  throw ValidationError(std::string(name),
                        s.vehicle_id + "#" + std::to_string(s.segment_index) + ": " + detail);
}

void check_length(const ChargingSegment& s, std::size_t got, const char* channel) {
  if (got != s.n_samples()) {
    fail(invariant::kEqualLengths, s,
         std::string(channel) + " has " + std::to_string(got) + " samples, expected " +
             std::to_string(s.n_samples()));
  }
}

void check_finite(const ChargingSegment& s, const std::vector<double>& v, const char* channel) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) {
      fail(invariant::kFinite, s, std::string(channel) + " at sample " + std::to_string(k));
    }
  }
}

}  // namespace

void validate(const ChargingSegment& s) {
  const std::size_t n = s.n_samples();
  if (n < kMinSamples) {
    fail(invariant::kMinLength, s, "got " + std::to_string(n) + " samples");
  }
  check_length(s, s.pack_voltage.size(), "pack_v");
  check_length(s, s.current.size(), "current");
  check_length(s, s.soc.size(), "soc");
  if (s.cell_voltages.empty()) fail(invariant::kHasCells, s, "no cell voltage channels");
  if (s.temperatures.empty()) fail(invariant::kHasProbes, s, "no temperature channels");
  for (const auto& c : s.cell_voltages) check_length(s, c.size(), "cell_v");
  for (const auto& t : s.temperatures) check_length(s, t.size(), "temp");

  check_finite(s, s.timestamps, "t");
  check_finite(s, s.pack_voltage, "pack_v");
  check_finite(s, s.current, "current");
  check_finite(s, s.soc, "soc");
  for (const auto& c : s.cell_voltages) check_finite(s, c, "cell_v");
  for (const auto& t : s.temperatures) check_finite(s, t, "temp");

  for (std::size_t k = 1; k < n; ++k) {
    if (!(s.timestamps[k] > s.timestamps[k - 1])) {
      fail(invariant::kTimestamps, s, "at sample " + std::to_string(k));
    }
  }
  for (std::size_t c = 0; c < s.n_cells(); ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      const double v = s.cell_voltages[c][k];
      if (!(v > 0.0 && v < 6.0)) {
        fail(invariant::kCellVoltageRange, s,
             "cell " + std::to_string(c + 1) + " sample " + std::to_string(k) + " = " +
                 std::to_string(v));
      }
    }
  }
  for (std::size_t p = 0; p < s.n_probes(); ++p) {
    for (std::size_t k = 0; k < n; ++k) {
      const double t = s.temperatures[p][k];
      if (!(t > -40.0 && t < 150.0)) {
        fail(invariant::kTemperatureRange, s,
             "probe " + std::to_string(p + 1) + " sample " + std::to_string(k) + " = " +
                 std::to_string(t));
      }
    }
  }
  double running_max = s.soc.front();
  for (std::size_t k = 0; k < n; ++k) {
    const double q = s.soc[k];
    if (q < 0.0 || q > 100.0) fail(invariant::kSocRange, s, "sample " + std::to_string(k));
    if (q < running_max - kSocTolerance) {
      fail(invariant::kSocMonotonic, s, "drop at sample " + std::to_string(k));
    }
    running_max = std::max(running_max, q);
  }
}

std::vector<std::string> FleetDataset::vehicle_ids() const {
  std::vector<std::string> ids;
  ids.reserve(vehicle_labels.size());
  for (const auto& [id, label] : vehicle_labels) ids.push_back(id);
  return ids;
}

void validate(const FleetDataset& dataset) {
  for (const auto& s : dataset.segments) {
    auto it = dataset.vehicle_labels.find(s.vehicle_id);
    if (it == dataset.vehicle_labels.end()) {
      throw ValidationError("every segment's vehicle has a label",
                            "vehicle '" + s.vehicle_id + "' missing from labels");
    }
    if (s.label && *s.label != it->second) {
      throw ValidationError("segments carry their vehicle's label",
                            s.vehicle_id + "#" + std::to_string(s.segment_index));
    }
    validate(s);
  }
}

}  // namespace battdiag

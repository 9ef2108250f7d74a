#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "battdiag/segment.hpp"

namespace battdiag {

inline constexpr std::size_t kNumFeatures = 10;

// Mechanism-driven features in canonical order.
enum class Feature : std::size_t {
  Cycles = 0,           // f_cyc
  CcRatio,              // f_cc
  MaxSoc,               // f_soc
  PackCellRatio,        // f_vr
  VoltageCorrelation,   // f_corr
  InitialMinVoltage,    // f_v0
  VoltageSlope,         // f_beta
  MaxTempDifference,    // f_dT
  MaxTempRate,          // f_dTdt
  TerminalTemperature,  // f_Tend
};

std::string_view symbol(Feature feature);
// Throws ConfigError for an unknown symbol.
Feature feature_from_symbol(std::string_view symbol);
std::optional<Feature> try_feature_from_symbol(std::string_view symbol);

constexpr std::size_t index(Feature feature) noexcept {
  return static_cast<std::size_t>(feature);
}
constexpr Feature feature_at(std::size_t i) noexcept { return static_cast<Feature>(i); }

struct FeatureVector {
  std::array<double, kNumFeatures> values{};

  double operator[](Feature f) const noexcept { return values[index(f)]; }
  double& operator[](Feature f) noexcept { return values[index(f)]; }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  double& operator[](std::size_t i) noexcept { return values[i]; }

  bool operator==(const FeatureVector&) const = default;
};

struct PhaseBoundary {
  std::size_t cv_start_index = 0;  // n_samples when there is no CV phase
  double t_cc = 0.0;               // s
  double t_cv = 0.0;               // s
};

struct PhaseDetectionParams {
  double voltage_eps = 0.01;   // V below the segment's peak max-cell voltage
  double current_drop = 0.05;  // fraction below the plateau current
};

// CV starts at the first sample whose max cell voltage is within
// voltage_eps of the segment peak and whose current has dropped by
// current_drop relative to the plateau (median current over the first
// quartile of samples). Each sample owns the interval to its successor; the
// last sample reuses the preceding interval.
PhaseBoundary detect_phase_boundary(const ChargingSegment& segment,
                                    const PhaseDetectionParams& params = {});

FeatureVector extract_features(const ChargingSegment& segment, const PhaseBoundary& boundary);

inline FeatureVector extract_features(const ChargingSegment& segment,
                                      const PhaseDetectionParams& params = {}) {
  return extract_features(segment, detect_phase_boundary(segment, params));
}

// Building blocks of extract_features, exposed for reuse and testing.
namespace feature_math {

inline constexpr double kFlatVariance = 1e-12;

double cc_ratio(double t_cc, double t_cv);

// Pearson correlation; 1.0 when either series has variance below kFlatVariance.
double pearson(std::span<const double> a, std::span<const double> b);

// Two-pass ordinary-least-squares slope of y on x; 0 for a degenerate x span.
double ols_slope(std::span<const double> x, std::span<const double> y);

// Largest forward difference of `values` per minute of `times`.
double max_rate_per_minute(std::span<const double> times, std::span<const double> values);

}  // namespace feature_math

}  // namespace battdiag

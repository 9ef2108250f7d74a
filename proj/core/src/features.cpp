#include "battdiag/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "battdiag/error.hpp"

namespace battdiag {

namespace {

constexpr std::array<std::string_view, kNumFeatures> kSymbols = {
    "f_cyc", "f_cc", "f_soc", "f_vr", "f_corr", "f_v0", "f_beta", "f_dT", "f_dTdt", "f_Tend"};

double max_cell_voltage(const ChargingSegment& s, std::size_t k) {
  double v = s.cell_voltages.front()[k];
  for (const auto& cell : s.cell_voltages) v = std::max(v, cell[k]);
  return v;
}

std::vector<double> mean_cell_voltage(const ChargingSegment& s) {
  std::vector<double> mean(s.n_samples(), 0.0);
  for (const auto& cell : s.cell_voltages) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += cell[k];
  }
  const double n = static_cast<double>(s.n_cells());
  for (double& v : mean) v /= n;
  return mean;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

std::string_view symbol(Feature feature) { return kSymbols[index(feature)]; }

std::optional<Feature> try_feature_from_symbol(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (kSymbols[i] == name) return feature_at(i);
  }
  return std::nullopt;
}

Feature feature_from_symbol(std::string_view name) {
  if (auto f = try_feature_from_symbol(name)) return *f;
  throw ConfigError("unknown feature symbol '" + std::string(name) + "'");
}

namespace feature_math {

double cc_ratio(double t_cc, double t_cv) {
  const double total = t_cc + t_cv;
  return total > 0.0 ? t_cc / total : 1.0;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double da = a[k] - ma;
    const double db = b[k] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  const double n = static_cast<double>(a.size());
  if (saa / n < kFlatVariance || sbb / n < kFlatVariance) return 1.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    sxx += dx * dx;
    sxy += dx * (y[k] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

double max_rate_per_minute(std::span<const double> times, std::span<const double> values) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < values.size(); ++k) {
    best = std::max(best, (values[k] - values[k - 1]) / (times[k] - times[k - 1]));
  }
  return values.size() > 1 ? best * 60.0 : 0.0;
}

}  // namespace feature_math

PhaseBoundary detect_phase_boundary(const ChargingSegment& s, const PhaseDetectionParams& params) {
  const std::size_t n = s.n_samples();
  std::vector<double> vmax(n);
  for (std::size_t k = 0; k < n; ++k) vmax[k] = max_cell_voltage(s, k);
  const double peak = *std::max_element(vmax.begin(), vmax.end());

  const std::size_t quartile = std::max<std::size_t>(1, n / 4);
  const double plateau =
      median(std::vector<double>(s.current.begin(), s.current.begin() + quartile));
  const double current_limit = (1.0 - params.current_drop) * plateau;
  const double voltage_limit = peak - params.voltage_eps;

  PhaseBoundary b;
  b.cv_start_index = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (vmax[k] >= voltage_limit && s.current[k] <= current_limit) {
      b.cv_start_index = k;
      break;
    }
  }

  const auto& t = s.timestamps;
  const double last_interval = t[n - 1] - t[n - 2];
  if (b.cv_start_index == n) {
    b.t_cc = t[n - 1] - t[0] + last_interval;
    b.t_cv = 0.0;
  } else {
    b.t_cc = t[b.cv_start_index] - t[0];
    b.t_cv = t[n - 1] - t[b.cv_start_index] + last_interval;
  }
  return b;
}

FeatureVector extract_features(const ChargingSegment& s, const PhaseBoundary& boundary) {
  const std::size_t n = s.n_samples();
  const std::vector<double> mean_v = mean_cell_voltage(s);
  FeatureVector f;

  f[Feature::Cycles] = s.cycles();
  f[Feature::CcRatio] = feature_math::cc_ratio(boundary.t_cc, boundary.t_cv);
  f[Feature::MaxSoc] = *std::max_element(s.soc.begin(), s.soc.end());

  double ratio_sum = 0.0;
  const double n_cells = static_cast<double>(s.n_cells());
  for (std::size_t k = 0; k < n; ++k) {
    ratio_sum += s.pack_voltage[k] / (n_cells * max_cell_voltage(s, k));
  }
  f[Feature::PackCellRatio] = ratio_sum / static_cast<double>(n);

  double corr_sum = 0.0;
  for (const auto& cell : s.cell_voltages) corr_sum += feature_math::pearson(cell, mean_v);
  f[Feature::VoltageCorrelation] = corr_sum / n_cells;

  double v0 = s.cell_voltages.front()[0];
  for (const auto& cell : s.cell_voltages) v0 = std::min(v0, cell[0]);
  f[Feature::InitialMinVoltage] = v0;

  f[Feature::VoltageSlope] = feature_math::ols_slope(s.timestamps, mean_v);

  std::vector<double> t_max(n);
  double max_spread = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double hi = s.temperatures.front()[k];
    double lo = hi;
    for (const auto& probe : s.temperatures) {
      hi = std::max(hi, probe[k]);
      lo = std::min(lo, probe[k]);
    }
    t_max[k] = hi;
    max_spread = std::max(max_spread, hi - lo);
  }
  f[Feature::MaxTempDifference] = max_spread;
  f[Feature::MaxTempRate] = feature_math::max_rate_per_minute(s.timestamps, t_max);
  f[Feature::TerminalTemperature] = t_max.back();
  return f;
}

}  // namespace battdiag

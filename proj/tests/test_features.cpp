#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "battdiag/error.hpp"
#include "battdiag/feature_table.hpp"
#include "battdiag/features.hpp"
#include "battdiag/rng.hpp"
#include "battdiag/synth.hpp"
#include "support.hpp"

namespace battdiag {
namespace {

using testing::cc_cv_segment;

// Segment with per-sample noise on every channel, for property checks.
ChargingSegment noisy_segment(Rng& rng) {
  const std::size_t n_cc = 8 + rng.index(60);
  const std::size_t n_cv = rng.index(40);
  auto seg = cc_cv_segment(n_cc, n_cv, 2 + rng.index(6), 1 + rng.index(4),
                           rng.uniform(1.0, 30.0));
  for (auto& cell : seg.cell_voltages) {
    const double offset = rng.normal(0.0, 0.01);
    for (auto& v : cell) v += offset + rng.normal(0.0, 0.002);
  }
  for (std::size_t k = 0; k < seg.n_samples(); ++k) {
    double sum = 0.0;
    for (const auto& cell : seg.cell_voltages) sum += cell[k];
    seg.pack_voltage[k] = sum * (1.0 + rng.normal(0.0, 0.001));
  }
  for (auto& probe : seg.temperatures) {
    const double offset = rng.normal(0.0, 0.5);
    for (auto& t : probe) t += offset + rng.normal(0.0, 0.05);
  }
  return seg;
}

TEST(PhaseBoundary, ConstructedSwitchIndex) {
  const auto seg = cc_cv_segment(300, 100);
  const PhaseBoundary b = detect_phase_boundary(seg, {0.01, 0.05});
  EXPECT_EQ(b.cv_start_index, 300u);
  EXPECT_DOUBLE_EQ(b.t_cc, 3000.0);
  EXPECT_DOUBLE_EQ(b.t_cv, 1000.0);
}

TEST(PhaseBoundary, NoCvPhase) {
  auto seg = cc_cv_segment(40, 0);
  const PhaseBoundary b = detect_phase_boundary(seg);
  EXPECT_EQ(b.cv_start_index, seg.n_samples());
  EXPECT_EQ(b.t_cv, 0.0);
  EXPECT_DOUBLE_EQ(b.t_cc, 400.0);
  EXPECT_EQ(extract_features(seg, b)[Feature::CcRatio], 1.0);
}

TEST(PhaseBoundary, TwoPlateauSamplesAfterEightCc) {
  const auto seg = cc_cv_segment(8, 2);
  EXPECT_EQ(detect_phase_boundary(seg).cv_start_index, 8u);
}

TEST(PhaseBoundary, PlateauWithoutCurrentDropIsStillCc) {
  auto seg = cc_cv_segment(20, 10);
  for (auto& i : seg.current) i = 50.0;
  EXPECT_EQ(detect_phase_boundary(seg).cv_start_index, seg.n_samples());
}

TEST(PhaseBoundary, ThresholdsAreConfigurable) {
  auto seg = cc_cv_segment(20, 10);
  // A 3 % current dip before the plateau only counts under a 2 % drop rule.
  for (std::size_t k = 20; k < 30; ++k) seg.current[k] = 48.5;
  EXPECT_EQ(detect_phase_boundary(seg, {0.01, 0.05}).cv_start_index, seg.n_samples());
  EXPECT_EQ(detect_phase_boundary(seg, {0.01, 0.02}).cv_start_index, 20u);
}

TEST(Features, CcRatioFixture) {
  PhaseBoundary b;
  b.t_cc = 3000.0;
  b.t_cv = 1000.0;
  EXPECT_NEAR(extract_features(cc_cv_segment(300, 100), b)[Feature::CcRatio], 0.75, 1e-9);
  EXPECT_NEAR(feature_math::cc_ratio(3000.0, 1000.0), 0.75, 1e-9);
}

TEST(Features, IdenticalCellsGiveUnitRatioAndCorrelation) {
  const auto seg = cc_cv_segment(30, 10, 5, 2);
  const FeatureVector f = extract_features(seg);
  EXPECT_NEAR(f[Feature::PackCellRatio], 1.0, 1e-9);
  EXPECT_NEAR(f[Feature::VoltageCorrelation], 1.0, 1e-9);
}

TEST(Features, TemperatureRateFixture) {
  auto seg = cc_cv_segment(8, 0, 2, 2);
  const std::vector<double> tail = {25.0, 25.5, 26.5};
  for (auto& probe : seg.temperatures) {
    for (std::size_t k = 0; k < 8; ++k) probe[k] = k < 5 ? 25.0 : tail[k - 5];
  }
  const FeatureVector f = extract_features(seg);
  EXPECT_NEAR(f[Feature::MaxTempRate], 6.0, 1e-9);
  EXPECT_NEAR(f[Feature::TerminalTemperature], 26.5, 1e-9);

  const std::vector<double> t = {0.0, 10.0, 20.0};
  EXPECT_NEAR(feature_math::max_rate_per_minute(t, tail), 6.0, 1e-9);
}

TEST(Features, LinearMeanVoltageSlope) {
  auto seg = cc_cv_segment(30, 0, 3, 1);
  for (std::size_t k = 0; k < seg.n_samples(); ++k) {
    const double v = 3.0 + 0.0001 * seg.timestamps[k];
    seg.cell_voltages[0][k] = v - 0.01;
    seg.cell_voltages[1][k] = v;
    seg.cell_voltages[2][k] = v + 0.01;
  }
  EXPECT_NEAR(extract_features(seg)[Feature::VoltageSlope], 1.0e-4, 1e-12);
}

TEST(Features, RemainingFeaturesFromDefinitions) {
  auto seg = cc_cv_segment(20, 5, 3, 3);
  seg.cycle_count = 640.0;
  seg.cell_voltages[2][0] = 3.41;
  seg.temperatures[1][7] += 2.5;
  const FeatureVector f = extract_features(seg);
  EXPECT_EQ(f[Feature::Cycles], 640.0);
  EXPECT_DOUBLE_EQ(f[Feature::MaxSoc], 90.0);
  EXPECT_DOUBLE_EQ(f[Feature::InitialMinVoltage], 3.41);
  EXPECT_NEAR(f[Feature::MaxTempDifference], 2.5, 1e-12);
}

TEST(FeatureMath, FlatSeriesCorrelationIsOne) {
  const std::vector<double> flat(10, 4.1);
  std::vector<double> ramp(10);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  EXPECT_EQ(feature_math::pearson(flat, ramp), 1.0);
  EXPECT_EQ(feature_math::pearson(ramp, flat), 1.0);
}

TEST(FeatureMath, DegenerateTimeSpanSlopeIsZero) {
  const std::vector<double> t(5, 3.0);
  const std::vector<double> v = {1, 2, 3, 4, 5};
  EXPECT_EQ(feature_math::ols_slope(t, v), 0.0);
}

TEST(FeatureMath, AntiCorrelated) {
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {8, 6, 4, 2};
  EXPECT_NEAR(feature_math::pearson(a, b), -1.0, 1e-12);
}

// --- properties over randomized segments ------------------------------------

class FeatureProperties : public ::testing::Test {
 protected:
  Rng rng_{2024};
};

TEST_F(FeatureProperties, CcRatioWithinUnitInterval) {
  for (int i = 0; i < 200; ++i) {
    const auto seg = noisy_segment(rng_);
    const double f_cc = extract_features(seg)[Feature::CcRatio];
    ASSERT_GE(f_cc, 0.0);
    ASSERT_LE(f_cc, 1.0);
  }
}

TEST_F(FeatureProperties, PackCellRatioIsScaleInvariant) {
  for (int i = 0; i < 100; ++i) {
    auto seg = noisy_segment(rng_);
    const double before = extract_features(seg)[Feature::PackCellRatio];
    const double c = rng_.uniform(0.5, 1.4);
    for (auto& cell : seg.cell_voltages) {
      for (auto& v : cell) v *= c;
    }
    for (auto& v : seg.pack_voltage) v *= c;
    ASSERT_NEAR(extract_features(seg)[Feature::PackCellRatio], before, 1e-12);
  }
}

TEST_F(FeatureProperties, CorrelationIgnoresCellOffset) {
  for (int i = 0; i < 100; ++i) {
    auto seg = noisy_segment(rng_);
    const double before = extract_features(seg)[Feature::VoltageCorrelation];
    const double offset = rng_.uniform(-0.2, 0.2);
    for (auto& v : seg.cell_voltages[rng_.index(seg.n_cells())]) v += offset;
    ASSERT_NEAR(extract_features(seg)[Feature::VoltageCorrelation], before, 1e-9);
  }
}

TEST_F(FeatureProperties, TemperatureSpreadIsNonNegativeAndZeroOnlyWhenProbesAgree) {
  for (int i = 0; i < 100; ++i) {
    auto seg = noisy_segment(rng_);
    ASSERT_GE(extract_features(seg)[Feature::MaxTempDifference], 0.0);
    for (auto& probe : seg.temperatures) probe = seg.temperatures.front();
    ASSERT_EQ(extract_features(seg)[Feature::MaxTempDifference], 0.0);
    if (seg.n_probes() > 1) {
      seg.temperatures.back()[rng_.index(seg.n_samples())] += 0.01;
      ASSERT_GT(extract_features(seg)[Feature::MaxTempDifference], 0.0);
    }
  }
}

TEST_F(FeatureProperties, SlopeMatchesClosedForm) {
  for (int i = 0; i < 100; ++i) {
    const auto seg = noisy_segment(rng_);
    const std::size_t n = seg.n_samples();
    // Closed-form OLS in extended precision, mean over cells per sample.
    long double t_bar = 0, v_bar = 0;
    std::vector<long double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
      long double sum = 0;
      for (const auto& cell : seg.cell_voltages) sum += cell[k];
      v[k] = sum / static_cast<long double>(seg.n_cells());
      t_bar += seg.timestamps[k];
      v_bar += v[k];
    }
    t_bar /= n;
    v_bar /= n;
    long double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      sxy += (seg.timestamps[k] - t_bar) * (v[k] - v_bar);
      sxx += (seg.timestamps[k] - t_bar) * (seg.timestamps[k] - t_bar);
    }
    const double expected = static_cast<double>(sxy / sxx);
    const double got = extract_features(seg)[Feature::VoltageSlope];
    ASSERT_NEAR(got, expected, 1e-12 * std::max(1e-12, std::abs(expected)) + 1e-18);
  }
}

TEST(FeatureTable, CsvRoundTrip) {
  FleetSpec spec;
  spec.n_vehicles = 4;
  spec.segments_per_vehicle = 3;
  spec.samples_per_segment = 60;
  const auto rows = extract_feature_rows(generate_fleet(spec).dataset, {}, 3);
  ASSERT_EQ(rows.size(), 12u);
  std::stringstream buf;
  write_feature_csv(buf, rows);
  const auto back = read_feature_csv(buf, "mem");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].vehicle_id, rows[i].vehicle_id);
    EXPECT_EQ(back[i].segment_index, rows[i].segment_index);
    EXPECT_EQ(back[i].x, rows[i].x);
    EXPECT_EQ(back[i].label, rows[i].label);
  }
}

TEST(FeatureTable, ParallelExtractionMatchesSerial) {
  FleetSpec spec;
  spec.n_vehicles = 6;
  spec.segments_per_vehicle = 4;
  spec.samples_per_segment = 80;
  const auto data = generate_fleet(spec).dataset;
  const auto serial = extract_feature_rows(data, {}, 1);
  const auto parallel = extract_feature_rows(data, {}, 8);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i].x, parallel[i].x);
}

TEST(FeatureTable, RejectsWrongHeader) {
  std::stringstream buf("vehicle_id,segment_index,f_cc\nV1,0,0.5\n");
  EXPECT_THROW(read_feature_csv(buf, "bad"), ParseError);
}

}  // namespace
}  // namespace battdiag

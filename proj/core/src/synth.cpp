#include "battdiag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "battdiag/error.hpp"
#include "battdiag/rng.hpp"

namespace battdiag {

using nlohmann::json;

namespace {

constexpr double kSampleInterval = 10.0;  // s
constexpr double kTopVoltage = 4.15;      // V, CV setpoint per cell
constexpr double kDecaySamples = 10.0;    // CV current time constant

// Properties fixed for a vehicle across its charging history.
struct VehicleTraits {
  double base_cycles = 0.0;
  double ambient = 25.0;
  std::vector<double> cell_offset;   // V
  std::vector<double> cell_gain;     // ramp multiplier
  std::vector<double> probe_offset;  // degC
  std::vector<double> probe_gradient;
  std::size_t weak_cell = 0;
  std::size_t hot_probe = 0;
};

VehicleTraits draw_traits(const FleetSpec& spec, Rng& rng) {
  VehicleTraits t;
  t.base_cycles = std::round(rng.uniform(200.0, 1200.0));
  t.ambient = rng.uniform(18.0, 28.0);
  for (std::size_t c = 0; c < spec.n_cells; ++c) {
    t.cell_offset.push_back(rng.normal(0.0, 0.002));
    t.cell_gain.push_back(1.0 + rng.normal(0.0, 0.002));
  }
  for (std::size_t p = 0; p < spec.n_probes; ++p) {
    t.probe_offset.push_back(rng.normal(0.0, 0.15));
    t.probe_gradient.push_back(rng.uniform(-0.05, 0.05));
  }
  t.weak_cell = static_cast<std::size_t>(rng.index(spec.n_cells));
  t.hot_probe = static_cast<std::size_t>(rng.index(spec.n_probes));
  return t;
}

bool is(std::optional<FaultType> fault, FaultType f) { return fault && *fault == f; }

}  // namespace

void FleetSpec::validate() const {
  if (n_vehicles < 1) throw ConfigError("fleet spec: n_vehicles must be >= 1");
  if (!(abnormal_fraction >= 0.0 && abnormal_fraction <= 1.0)) {
    throw ConfigError("fleet spec: abnormal_fraction must lie in [0, 1]");
  }
  if (segments_per_vehicle < 1) throw ConfigError("fleet spec: segments_per_vehicle must be >= 1");
  if (samples_per_segment < 2 * kMinSamples) {
    throw ConfigError("fleet spec: samples_per_segment must be >= " +
                      std::to_string(2 * kMinSamples));
  }
  if (n_cells < 1 || n_probes < 1) throw ConfigError("fleet spec: need >= 1 cell and probe");
  if (voltage_noise < 0.0 || temperature_noise < 0.0) {
    throw ConfigError("fleet spec: noise levels must be non-negative");
  }
  double total = 0.0;
  for (const auto& [fault, p] : fault_mix) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("fleet spec: fault_mix entries must lie in [0, 1]");
    total += p;
  }
  if (abnormal_fraction > 0.0 && std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("fleet spec: fault_mix must sum to 1");
  }
}

FleetSpec fleet_spec_from_json(const std::string& text) {
  FleetSpec spec;
  try {
    const json doc = json::parse(text);
    spec.n_vehicles = doc.value("n_vehicles", spec.n_vehicles);
    spec.abnormal_fraction = doc.value("abnormal_fraction", spec.abnormal_fraction);
    spec.segments_per_vehicle = doc.value("segments_per_vehicle", spec.segments_per_vehicle);
    spec.samples_per_segment = doc.value("samples_per_segment", spec.samples_per_segment);
    spec.n_cells = doc.value("n_cells", spec.n_cells);
    spec.n_probes = doc.value("n_probes", spec.n_probes);
    spec.voltage_noise = doc.value("voltage_noise", spec.voltage_noise);
    spec.temperature_noise = doc.value("temperature_noise", spec.temperature_noise);
    spec.seed = doc.value("seed", spec.seed);
    if (doc.contains("fault_mix")) {
      spec.fault_mix.clear();
      for (const auto& [c, p] : doc["fault_mix"].items()) {
        spec.fault_mix[fault_from_code(c)] = p.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("fleet spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string fleet_spec_to_json(const FleetSpec& spec) {
  nlohmann::ordered_json mix = nlohmann::ordered_json::object();
  for (const auto& [fault, p] : spec.fault_mix) mix[std::string(code(fault))] = p;
  nlohmann::ordered_json doc;
  doc["n_vehicles"] = spec.n_vehicles;
  doc["abnormal_fraction"] = spec.abnormal_fraction;
  doc["fault_mix"] = std::move(mix);
  doc["segments_per_vehicle"] = spec.segments_per_vehicle;
  doc["samples_per_segment"] = spec.samples_per_segment;
  doc["n_cells"] = spec.n_cells;
  doc["n_probes"] = spec.n_probes;
  doc["voltage_noise"] = spec.voltage_noise;
  doc["temperature_noise"] = spec.temperature_noise;
  doc["seed"] = spec.seed;
  return doc.dump(2);
}

ChargingSegment synthesize_segment(const FleetSpec& spec, const std::string& vehicle_id,
                                   std::size_t segment_index, std::optional<FaultType> fault,
                                   double severity, std::uint64_t seed) {
  Rng vehicle_rng(seed);
  const VehicleTraits traits = draw_traits(spec, vehicle_rng);
  Rng rng(mix_seed(seed ^ mix_seed(segment_index + 1)));
  const double s = fault ? std::clamp(severity, 0.0, 1.0) : 0.0;

  const std::size_t n = spec.samples_per_segment;
  ChargingSegment seg;
  seg.vehicle_id = vehicle_id;
  seg.segment_index = segment_index;

  // Charging protocol for this session.
  double cc_fraction = rng.uniform(0.72, 0.82);
  if (is(fault, FaultType::CF)) cc_fraction -= 0.22 * s;
  if (is(fault, FaultType::BMS)) cc_fraction += rng.uniform(-0.12, 0.04) * s;
  const auto cc_end = static_cast<std::size_t>(
      std::clamp(std::round(cc_fraction * static_cast<double>(n)), 4.0, static_cast<double>(n - 2)));
  const double i_cc = rng.uniform(40.0, 60.0);
  const double v_start = rng.uniform(3.50, 3.60);
  double soc_start = rng.uniform(15.0, 40.0);
  double soc_end = rng.uniform(88.0, 96.0);
  if (is(fault, FaultType::TR)) soc_end += 3.0 * s;
  if (is(fault, FaultType::BMS)) soc_end += 6.0 * s;
  soc_end = std::min(soc_end, 100.0);

  // Sessions are spread over the vehicle's service life and seasons.
  double cycles = traits.base_cycles + 30.0 * static_cast<double>(segment_index) +
                  rng.uniform(0.0, 30.0);
  if (is(fault, FaultType::CF)) cycles += 1500.0 * s;
  if (is(fault, FaultType::CD)) cycles += 800.0 * s;
  seg.cycle_count = std::round(cycles);
  const double ambient = traits.ambient + rng.normal(0.0, 3.0);

  seg.timestamps.resize(n);
  seg.current.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    seg.timestamps[k] = kSampleInterval * static_cast<double>(k);
    double i = k < cc_end ? i_cc
                          : i_cc * std::exp(-static_cast<double>(k - cc_end + 1) / kDecaySamples);
    if (is(fault, FaultType::BMS)) i *= 1.0 + 0.08 * s * rng.normal();
    seg.current[k] = std::max(i, 0.5);
  }

  // Cell voltages: concave ramp to the CV setpoint, then a plateau.
  seg.cell_voltages.assign(spec.n_cells, std::vector<double>(n));
  for (std::size_t c = 0; c < spec.n_cells; ++c) {
    double offset = traits.cell_offset[c];
    double gain = traits.cell_gain[c];
    double walk_sigma = 0.0;
    double onset_drop = 0.0;
    if (is(fault, FaultType::CD)) {
      Rng cell_rng(mix_seed(seed ^ (0xCDULL << 32) ^ c));
      offset += cell_rng.normal(0.0, 0.025) * s;
      gain += cell_rng.normal(0.0, 0.05) * s;
      walk_sigma = 0.0008 * s;
    }
    if (is(fault, FaultType::ISC) && c == traits.weak_cell) {
      onset_drop = 0.05 * s;
      walk_sigma = 0.004 * s;
    }
    double walk = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double v;
      if (k < cc_end) {
        const double frac = static_cast<double>(k) / static_cast<double>(cc_end - 1);
        v = v_start + (kTopVoltage - v_start) * std::min(1.0, std::pow(frac, 0.8) * gain);
      } else {
        v = kTopVoltage;
      }
      // A leaking cell starts low and recovers unevenly during charging.
      const double lag = onset_drop * (1.0 - static_cast<double>(k) / static_cast<double>(n));
      if (walk_sigma > 0.0) walk += rng.normal(0.0, walk_sigma);
      v += offset - lag + walk + rng.normal(0.0, spec.voltage_noise);
      seg.cell_voltages[c][k] = std::clamp(v, 2.5, 4.4);
    }
  }

  seg.pack_voltage.assign(n, 0.0);
  const double pack_bias = is(fault, FaultType::BMS) ? 1.0 - 0.01 * s : 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& cell : seg.cell_voltages) seg.pack_voltage[k] += cell[k];
    seg.pack_voltage[k] *= pack_bias;
  }

  // SOC follows accumulated charge.
  std::vector<double> charge(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) charge[k] = charge[k - 1] + seg.current[k] * kSampleInterval;
  seg.soc.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    seg.soc[k] = std::min(soc_start + (soc_end - soc_start) * charge[k] / charge[n - 1], 100.0);
  }

  // First-order thermal model: Joule heating against cooling to ambient.
  double heating = 0.004;            // degC/s at plateau current
  double cooling = 1.0 / 2400.0;     // 1/s
  if (is(fault, FaultType::TR)) heating *= 1.0 + 1.2 * s;
  if (is(fault, FaultType::TM)) cooling *= 1.0 - 0.6 * s;
  std::vector<double> core(n);
  core[0] = ambient + rng.uniform(0.0, 2.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double load = seg.current[k] / i_cc;
    double dT = heating * load * load - cooling * (core[k - 1] - ambient);
    // Runaway precursor: self-heating accelerates late in the session.
    if (is(fault, FaultType::TR) && k > (n * 3) / 4) {
      dT += 0.006 * s * static_cast<double>(k - (n * 3) / 4) / static_cast<double>(n / 4);
    }
    core[k] = core[k - 1] + dT * kSampleInterval;
  }
  seg.temperatures.assign(spec.n_probes, std::vector<double>(n));
  for (std::size_t p = 0; p < spec.n_probes; ++p) {
    double gradient = traits.probe_gradient[p];
    double hotspot = 0.0;
    if (p == traits.hot_probe) {
      if (is(fault, FaultType::ISC)) hotspot = 3.0 * s;
      if (is(fault, FaultType::TM)) gradient += 0.5 * s;
      if (is(fault, FaultType::TR)) gradient += 0.3 * s;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double rise = core[k] - ambient;
      const double progress = static_cast<double>(k) / static_cast<double>(n - 1);
      seg.temperatures[p][k] = core[k] + traits.probe_offset[p] + gradient * rise +
                               hotspot * progress + rng.normal(0.0, spec.temperature_noise);
    }
  }
  return seg;
}

SyntheticFleet generate_fleet(const FleetSpec& spec) {
  spec.validate();
  SyntheticFleet fleet;
  Rng rng(mix_seed(spec.seed));

  const std::size_t n = spec.n_vehicles;
  const auto n_abnormal =
      static_cast<std::size_t>(std::lround(spec.abnormal_fraction * static_cast<double>(n)));

  // Largest-remainder allocation of fault types over the abnormal vehicles.
  std::vector<FaultType> faults;
  if (n_abnormal > 0) {
    std::vector<std::pair<double, FaultType>> remainders;
    for (const auto& [fault, p] : spec.fault_mix) {
      const double exact = p * static_cast<double>(n_abnormal);
      const auto whole = static_cast<std::size_t>(std::floor(exact));
      faults.insert(faults.end(), whole, fault);
      remainders.emplace_back(exact - static_cast<double>(whole), fault);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; faults.size() < n_abnormal; ++i) {
      faults.push_back(remainders[i % remainders.size()].second);
    }
    rng.shuffle(faults.begin(), faults.end());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::vector<std::optional<FaultType>> assigned(n);
  for (std::size_t i = 0; i < n_abnormal; ++i) assigned[order[i]] = faults[i];

  const int width = n >= 1000 ? 4 : 3;
  for (std::size_t v = 0; v < n; ++v) {
    std::string id = std::to_string(v + 1);
    id = "V" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0') + id;
    const std::uint64_t vehicle_seed = mix_seed(spec.seed ^ mix_seed(v + 1));
    const auto fault = assigned[v];
    const Label label = fault ? Label::Abnormal : Label::Normal;
    fleet.dataset.vehicle_labels[id] = label;
    fleet.injected[id] = fault;

    // Fault severity grows over the vehicle's history: early sessions carry
    // faint signatures.
    Rng severity_rng(mix_seed(vehicle_seed ^ 0x5E5E5E5EULL));
    const double first = severity_rng.uniform(0.10, 0.40);
    const double last = severity_rng.uniform(0.7, 1.0);
    for (std::size_t k = 0; k < spec.segments_per_vehicle; ++k) {
      const double t = spec.segments_per_vehicle > 1
                           ? static_cast<double>(k) / static_cast<double>(spec.segments_per_vehicle - 1)
                           : 1.0;
      ChargingSegment seg =
          synthesize_segment(spec, id, k, fault, first + (last - first) * t, vehicle_seed);
      seg.label = label;
      fleet.dataset.segments.push_back(std::move(seg));
    }
  }
  return fleet;
}

}  // namespace battdiag

#include "battdiag/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "battdiag/error.hpp"
#include "battdiag/parallel.hpp"

namespace battdiag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct Layout {
  std::size_t n_cells = 0;
  std::size_t n_probes = 0;
  bool has_cycle_count = false;
  std::size_t columns() const { return 4 + n_cells + n_probes + (has_cycle_count ? 1 : 0); }
};

Layout parse_header(std::string_view line, const std::string& source) {
  const auto cols = split_commas(line);
  auto bad = [&](const std::string& why) -> ParseError {
    return ParseError(source + ": line 1 (header): " + why);
  };
  static constexpr std::string_view kFixed[] = {"t", "pack_v", "current", "soc"};
  if (cols.size() < 6) throw bad("expected at least t,pack_v,current,soc,cell_v_1,temp_1");
  for (std::size_t i = 0; i < 4; ++i) {
    if (trim(cols[i]) != kFixed[i]) {
      throw bad("column " + std::to_string(i + 1) + " must be '" + std::string(kFixed[i]) + "'");
    }
  }
  Layout layout;
  std::size_t i = 4;
  while (i < cols.size() && trim(cols[i]) == "cell_v_" + std::to_string(layout.n_cells + 1)) {
    ++layout.n_cells;
    ++i;
  }
  while (i < cols.size() && trim(cols[i]) == "temp_" + std::to_string(layout.n_probes + 1)) {
    ++layout.n_probes;
    ++i;
  }
  if (i < cols.size() && trim(cols[i]) == "cycle_count") {
    layout.has_cycle_count = true;
    ++i;
  }
  if (layout.n_cells == 0) throw bad("no cell_v_1..cell_v_n columns");
  if (layout.n_probes == 0) throw bad("no temp_1..temp_m columns");
  if (i != cols.size()) throw bad("unexpected column '" + std::string(trim(cols[i])) + "'");
  return layout;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line,
                    std::size_t column) {
  field = trim(field);
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(source + ": row " + std::to_string(line) + ", column " +
                     std::to_string(column + 1) + ": malformed number '" + std::string(field) +
                     "'");
  }
  return value;
}

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::string safe_file_stem(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

fs::path manifest_path(const fs::path& path) {
  if (fs::is_directory(path)) return path / "manifest.json";
  return path;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

ChargingSegment read_segment_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source_name + ": empty file");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const Layout layout = parse_header(trim(line), source_name);

  ChargingSegment s;
  s.cell_voltages.resize(layout.n_cells);
  s.temperatures.resize(layout.n_probes);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_commas(row);
    if (fields.size() != layout.columns()) {
      throw ParseError(source_name + ": row " + std::to_string(line_no) + ": expected " +
                       std::to_string(layout.columns()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    std::size_t col = 0;
    auto next = [&] {
      const double v = parse_number(fields[col], source_name, line_no, col);
      ++col;
      return v;
    };
    s.timestamps.push_back(next());
    s.pack_voltage.push_back(next());
    s.current.push_back(next());
    s.soc.push_back(next());
    for (auto& cell : s.cell_voltages) cell.push_back(next());
    for (auto& probe : s.temperatures) probe.push_back(next());
    if (layout.has_cycle_count) {
      const double cycles = next();
      if (!s.cycle_count) s.cycle_count = cycles;
    }
  }
  return s;
}

ChargingSegment read_segment_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open segment file '" + path.string() + "'");
  return read_segment_csv(in, path.string());
}

void write_segment_csv(std::ostream& out, const ChargingSegment& s) {
  std::string buf = "t,pack_v,current,soc";
  for (std::size_t c = 1; c <= s.n_cells(); ++c) buf += ",cell_v_" + std::to_string(c);
  for (std::size_t p = 1; p <= s.n_probes(); ++p) buf += ",temp_" + std::to_string(p);
  if (s.cycle_count) buf += ",cycle_count";
  buf += '\n';
  for (std::size_t k = 0; k < s.n_samples(); ++k) {
    append_number(buf, s.timestamps[k]);
    buf += ',';
    append_number(buf, s.pack_voltage[k]);
    buf += ',';
    append_number(buf, s.current[k]);
    buf += ',';
    append_number(buf, s.soc[k]);
    for (const auto& cell : s.cell_voltages) {
      buf += ',';
      append_number(buf, cell[k]);
    }
    for (const auto& probe : s.temperatures) {
      buf += ',';
      append_number(buf, probe[k]);
    }
    if (s.cycle_count) {
      buf += ',';
      append_number(buf, *s.cycle_count);
    }
    buf += '\n';
  }
  out << buf;
}

void write_segment_csv(const fs::path& path, const ChargingSegment& segment) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  write_segment_csv(out, segment);
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::map<std::string, Label> load_manifest_labels(const fs::path& path) {
  const fs::path manifest = manifest_path(path);
  const json doc = read_json_file(manifest);
  if (!doc.is_object()) throw ParseError(manifest.string() + ": manifest must be a JSON object");
  std::map<std::string, Label> labels;
  for (const auto& [vehicle, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("label") || !entry["label"].is_string()) {
      throw ValidationError("every vehicle has a label",
                            manifest.string() + ": vehicle '" + vehicle + "' has no label");
    }
    labels[vehicle] = label_from_string(entry["label"].get<std::string>());
  }
  return labels;
}

FleetDataset load_segments(const fs::path& path, unsigned jobs) {
  const fs::path manifest = manifest_path(path);
  const fs::path base = manifest.parent_path();
  const json doc = read_json_file(manifest);

  FleetDataset dataset;
  dataset.vehicle_labels = load_manifest_labels(manifest);

  struct Job {
    std::string vehicle;
    std::size_t index;
    fs::path file;
  };
  std::vector<Job> work;
  for (const auto& [vehicle, label] : dataset.vehicle_labels) {
    const json& entry = doc.at(vehicle);
    if (!entry.contains("files") || !entry["files"].is_array()) {
      throw ParseError(manifest.string() + ": vehicle '" + vehicle + "' has no \"files\" array");
    }
    std::size_t idx = 0;
    for (const auto& f : entry["files"]) {
      if (!f.is_string()) {
        throw ParseError(manifest.string() + ": vehicle '" + vehicle + "' has a non-string file");
      }
      work.push_back({vehicle, idx++, base / f.get<std::string>()});
    }
  }

  dataset.segments.resize(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const Job& job = work[i];
    ChargingSegment s = read_segment_csv(job.file);
    s.vehicle_id = job.vehicle;
    s.segment_index = job.index;
    s.label = dataset.vehicle_labels.at(job.vehicle);
    try {
      validate(s);
    } catch (const ValidationError& e) {
      std::string_view detail = e.what();
      detail.remove_prefix(std::min(detail.size(), e.invariant().size() + 2));
      throw ValidationError(e.invariant(), job.file.string() + ": " + std::string(detail));
    }
    dataset.segments[i] = std::move(s);
  });
  return dataset;
}

void write_fleet(const fs::path& dir, const FleetDataset& dataset) {
  fs::create_directories(dir);
  json manifest = json::object();
  for (const auto& [vehicle, label] : dataset.vehicle_labels) {
    manifest[vehicle] = {{"label", std::string(to_string(label))}, {"files", json::array()}};
  }
  std::vector<const ChargingSegment*> ordered;
  ordered.reserve(dataset.segments.size());
  for (const auto& s : dataset.segments) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return std::tie(a->vehicle_id, a->segment_index) < std::tie(b->vehicle_id, b->segment_index);
  });
  for (const ChargingSegment* s : ordered) {
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_seg%04zu.csv", s->segment_index);
    const std::string name = safe_file_stem(s->vehicle_id) + suffix;
    write_segment_csv(dir / name, *s);
    manifest.at(s->vehicle_id)["files"].push_back(name);
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw ConfigError("cannot write manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << '\n';
}

}  // namespace battdiag

#include "battdiag/feature_table.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "battdiag/error.hpp"
#include "battdiag/parallel.hpp"

namespace battdiag {

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) return out;
    line.remove_prefix(comma + 1);
  }
}

std::string header() {
  std::string h = "vehicle_id,segment_index";
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    h += ',';
    h += symbol(feature_at(j));
  }
  return h + ",label";
}

}  // namespace

void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  std::string buf = header() + '\n';
  char num[32];
  for (const auto& row : rows) {
    if (row.vehicle_id.find_first_of(",\n\r") != std::string::npos) {
      throw ConfigError("vehicle id '" + row.vehicle_id + "' contains a CSV delimiter");
    }
    buf += row.vehicle_id;
    buf += ',';
    buf += std::to_string(row.segment_index);
    for (double v : row.x.values) {
      const auto [ptr, ec] = std::to_chars(num, num + sizeof(num), v);
      buf += ',';
      buf.append(num, ptr);
    }
    buf += ',';
    if (row.label) buf += to_string(*row.label);
    buf += '\n';
  }
  out << buf;
}

std::vector<FeatureRow> read_feature_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty feature file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header()) throw ParseError(source + ": unexpected feature header");

  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = fields_of(line);
    if (f.size() != kNumFeatures + 3) {
      throw ParseError(source + ": row " + std::to_string(line_no) + ": expected " +
                       std::to_string(kNumFeatures + 3) + " fields");
    }
    FeatureRow row;
    row.vehicle_id = std::string(f[0]);
    {
      const auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), row.segment_index);
      if (ec != std::errc() || ptr != f[1].data() + f[1].size()) {
        throw ParseError(source + ": row " + std::to_string(line_no) + ": bad segment_index");
      }
    }
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      const auto s = f[j + 2];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row.x[j]);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError(source + ": row " + std::to_string(line_no) + ": bad value for " +
                         std::string(symbol(feature_at(j))));
      }
    }
    if (!f.back().empty()) row.label = label_from_string(f.back());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open feature file '" + path.string() + "'");
  return read_feature_csv(in, path.string());
}

std::vector<FeatureRow> extract_feature_rows(const FleetDataset& dataset,
                                             const PhaseDetectionParams& params, unsigned jobs) {
  std::vector<FeatureRow> rows(dataset.segments.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const ChargingSegment& s = dataset.segments[i];
    rows[i] = FeatureRow{s.vehicle_id, s.segment_index, extract_features(s, params), s.label};
  });
  return rows;
}

}  // namespace battdiag

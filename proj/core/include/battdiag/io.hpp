#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "battdiag/segment.hpp"

namespace battdiag {

// Segment CSV:
//   t,pack_v,current,soc,cell_v_1..cell_v_n,temp_1..temp_m[,cycle_count]
// One row per sample. The optional trailing cycle_count column carries the
// same value on every row.
ChargingSegment read_segment_csv(std::istream& in, const std::string& source_name);
ChargingSegment read_segment_csv(const std::filesystem::path& path);

void write_segment_csv(std::ostream& out, const ChargingSegment& segment);
void write_segment_csv(const std::filesystem::path& path, const ChargingSegment& segment);

// Loads a fleet from a manifest
//   {vehicle_id: {"label": "Normal"|"Abnormal", "files": [...]}}
// `path` is either the manifest file or a directory containing
// manifest.json. File paths are resolved relative to the manifest. A file's
// position in "files" is its segment_index. Files may be parsed on up to
// `jobs` threads; the result is ordered by vehicle id then file position.
FleetDataset load_segments(const std::filesystem::path& path, unsigned jobs = 1);

// Reads only the vehicle -> label map of a manifest.
std::map<std::string, Label> load_manifest_labels(const std::filesystem::path& path);

// Writes one CSV per segment under `dir` plus dir/manifest.json.
void write_fleet(const std::filesystem::path& dir, const FleetDataset& dataset);

}  // namespace battdiag

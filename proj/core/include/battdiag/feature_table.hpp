#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "battdiag/features.hpp"

namespace battdiag {

struct FeatureRow {
  std::string vehicle_id;
  std::size_t segment_index = 0;
  FeatureVector x;
  std::optional<Label> label;
};

// vehicle_id,segment_index,f_cyc,...,f_Tend,label  (label may be empty)
void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_csv(std::istream& in, const std::string& source_name);
std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path);

// Extracts every segment's features on up to `jobs` threads; output order
// follows the dataset.
std::vector<FeatureRow> extract_feature_rows(const FleetDataset& dataset,
                                             const PhaseDetectionParams& params = {},
                                             unsigned jobs = 1);

}  // namespace battdiag

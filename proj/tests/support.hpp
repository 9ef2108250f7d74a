#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "battdiag/gbdt.hpp"
#include "battdiag/rng.hpp"
#include "battdiag/segment.hpp"

namespace battdiag::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Healthy-looking CC-CV segment: `n_cc` samples at 50 A with rising cell
// voltage, then `n_cv` samples pinned at 4.15 V with decaying current.
ChargingSegment cc_cv_segment(std::size_t n_cc, std::size_t n_cv, std::size_t n_cells = 3,
                              std::size_t n_probes = 2, double dt = 10.0);

// Random ensemble with up to `max_trees` trees of depth <= `max_depth`
// over all ten features, thresholds and leaves drawn from `rng`.
TreeEnsemble random_ensemble(Rng& rng, int max_trees, int max_depth);

FeatureVector random_features(Rng& rng);

std::vector<FeatureVector> random_background(Rng& rng, std::size_t n);

std::string read_file(const std::filesystem::path& path);

}  // namespace battdiag::testing

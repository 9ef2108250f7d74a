#include "support.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace battdiag::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::to_string(std::hash<std::string>{}(tag + std::to_string(counter++))) +
                     "_" + std::to_string(::getpid());
  path_ = fs::temp_directory_path() / ("battdiag_" + tag + "_" + stamp);
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ChargingSegment cc_cv_segment(std::size_t n_cc, std::size_t n_cv, std::size_t n_cells,
                              std::size_t n_probes, double dt) {
  const std::size_t n = n_cc + n_cv;
  ChargingSegment seg;
  seg.vehicle_id = "T001";
  seg.timestamps.resize(n);
  seg.current.resize(n);
  seg.soc.resize(n);
  seg.pack_voltage.resize(n);
  seg.cell_voltages.assign(n_cells, std::vector<double>(n));
  seg.temperatures.assign(n_probes, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    seg.timestamps[k] = dt * static_cast<double>(k);
    const bool cc = k < n_cc;
    seg.current[k] = cc ? 50.0 : 50.0 * std::exp(-static_cast<double>(k - n_cc + 1) / 10.0);
    const double v = cc ? 3.6 + 0.5 * static_cast<double>(k) / static_cast<double>(n_cc) : 4.15;
    for (std::size_t c = 0; c < n_cells; ++c) seg.cell_voltages[c][k] = v;
    seg.pack_voltage[k] = v * static_cast<double>(n_cells);
    seg.soc[k] = 20.0 + 70.0 * static_cast<double>(k) / static_cast<double>(n - 1);
    for (std::size_t p = 0; p < n_probes; ++p) {
      seg.temperatures[p][k] = 25.0 + 0.01 * static_cast<double>(k);
    }
  }
  return seg;
}

namespace {

int grow(Tree& tree, Rng& rng, int depth, int max_depth) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (depth >= max_depth || (depth > 0 && rng.uniform() < 0.25)) {
    tree.nodes[id].value = rng.uniform(-2.0, 2.0);
    return id;
  }
  const int feature = static_cast<int>(rng.index(kNumFeatures));
  const double threshold = rng.uniform(-1.0, 1.0);
  const int left = grow(tree, rng, depth + 1, max_depth);
  const int right = grow(tree, rng, depth + 1, max_depth);
  tree.nodes[id].feature = feature;
  tree.nodes[id].threshold = threshold;
  tree.nodes[id].left = left;
  tree.nodes[id].right = right;
  return id;
}

}  // namespace

TreeEnsemble random_ensemble(Rng& rng, int max_trees, int max_depth) {
  TreeEnsemble model;
  model.base_score = rng.uniform(-1.0, 1.0);
  model.learning_rate = rng.uniform(0.1, 1.0);
  const int n_trees = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_trees)));
  for (int t = 0; t < n_trees; ++t) {
    Tree tree;
    grow(tree, rng, 0, max_depth);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

FeatureVector random_features(Rng& rng) {
  FeatureVector x;
  for (auto& v : x.values) v = rng.uniform(-1.5, 1.5);
  return x;
}

std::vector<FeatureVector> random_background(Rng& rng, std::size_t n) {
  std::vector<FeatureVector> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_features(rng));
  return rows;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace battdiag::testing

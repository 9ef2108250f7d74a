#include "battdiag/gbdt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "battdiag/error.hpp"
#include "battdiag/rng.hpp"

namespace battdiag {

using nlohmann::json;

std::size_t Tree::leaf_index(const FeatureVector& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return i;
}

namespace {

std::size_t depth_from(const Tree& t, std::size_t i) {
  const TreeNode& n = t.nodes[i];
  if (n.is_leaf()) return 0;
  return 1 + std::max(depth_from(t, static_cast<std::size_t>(n.left)),
                      depth_from(t, static_cast<std::size_t>(n.right)));
}

}  // namespace

std::size_t Tree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

std::size_t Tree::n_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeEnsemble::TreeEnsemble() {
  feature_names.reserve(kNumFeatures);
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    feature_names.emplace_back(symbol(feature_at(i)));
  }
}

void TrainConfig::validate() const {
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (max_leaves < 2) throw ConfigError("max_leaves must be >= 2");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (!(l2_leaf_penalty > 0.0)) throw ConfigError("l2_leaf_penalty must be positive");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(min_child_hessian > 0.0)) throw ConfigError("min_child_hessian must be positive");
  if (!(row_subsample > 0.0 && row_subsample <= 1.0)) {
    throw ConfigError("row_subsample must lie in (0, 1]");
  }
}

double logistic(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double predict_margin(const TreeEnsemble& model, const FeatureVector& x) {
  double sum = 0.0;
  for (const Tree& t : model.trees) sum += t.leaf_value(x);
  return model.base_score + model.learning_rate * sum;
}

double predict_proba(const TreeEnsemble& model, const FeatureVector& x) {
  return logistic(predict_margin(model, x));
}

namespace {

double clip(double p) { return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip); }

double target(Label y) { return y == Label::Abnormal ? 1.0 : 0.0; }

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool valid() const { return feature >= 0; }
};

// A leaf under construction: its rows sorted by each feature.
struct GrowingLeaf {
  int node = 0;
  int depth = 0;
  double grad = 0.0;
  double hess = 0.0;
  std::array<std::vector<int>, kNumFeatures> sorted;
  SplitCandidate best;
};

class TreeGrower {
 public:
  TreeGrower(std::span<const LabeledFeatures> data, std::span<const double> grad,
             std::span<const double> hess, const TrainConfig& config)
      : data_(data), grad_(grad), hess_(hess), config_(config), goes_left_(data.size(), 0) {}

  Tree grow(const std::array<std::vector<int>, kNumFeatures>& presorted,
            std::span<const char> in_bag) {
    Tree tree;
    tree.nodes.push_back(TreeNode{});

    GrowingLeaf root;
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      for (int r : presorted[j]) {
        if (in_bag[static_cast<std::size_t>(r)]) root.sorted[j].push_back(r);
      }
    }
    for (int r : root.sorted[0]) {
      root.grad += grad_[static_cast<std::size_t>(r)];
      root.hess += hess_[static_cast<std::size_t>(r)];
    }
    find_best_split(root);

    std::vector<GrowingLeaf> leaves;
    leaves.push_back(std::move(root));
    int n_leaves = 1;
    while (n_leaves < config_.max_leaves) {
      // Highest gain first; equal gains resolve to the earliest-created leaf.
      int pick = -1;
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!leaves[i].best.valid()) continue;
        if (pick < 0 || leaves[i].best.gain > leaves[static_cast<std::size_t>(pick)].best.gain) {
          pick = static_cast<int>(i);
        }
      }
      if (pick < 0) break;
      GrowingLeaf parent = std::move(leaves[static_cast<std::size_t>(pick)]);
      leaves.erase(leaves.begin() + pick);
      auto [left, right] = split(tree, parent);
      leaves.push_back(std::move(left));
      leaves.push_back(std::move(right));
      ++n_leaves;
    }
    for (const GrowingLeaf& leaf : leaves) {
      tree.nodes[static_cast<std::size_t>(leaf.node)].value =
          -leaf.grad / (leaf.hess + config_.l2_leaf_penalty);
    }
    return tree;
  }

 private:
  double score(double g, double h) const { return g * g / (h + config_.l2_leaf_penalty); }

  void find_best_split(GrowingLeaf& leaf) const {
    leaf.best = SplitCandidate{};
    const auto n = leaf.sorted[0].size();
    const auto min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);
    if (leaf.depth >= config_.max_depth || n < 2 * min_leaf) return;
    const double parent_score = score(leaf.grad, leaf.hess);

    // Features ascending, thresholds ascending, strict improvement: ties keep
    // the lowest feature index and then the lowest threshold.
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      const auto& rows = leaf.sorted[j];
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto r = static_cast<std::size_t>(rows[i]);
        gl += grad_[r];
        hl += hess_[r];
        const double v = data_[r].x[j];
        const double v_next = data_[static_cast<std::size_t>(rows[i + 1])].x[j];
        if (!(v < v_next)) continue;
        if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
        const double gr = leaf.grad - gl;
        const double hr = leaf.hess - hl;
        if (hl < config_.min_child_hessian || hr < config_.min_child_hessian) continue;
        const double gain = score(gl, hl) + score(gr, hr) - parent_score;
        if (gain > leaf.best.gain) {
          double thr = v + (v_next - v) / 2.0;
          if (!(thr < v_next)) thr = v;
          leaf.best = SplitCandidate{gain, static_cast<int>(j), thr};
        }
      }
    }
  }

  std::pair<GrowingLeaf, GrowingLeaf> split(Tree& tree, const GrowingLeaf& parent) {
    const auto feat = static_cast<std::size_t>(parent.best.feature);
    const double thr = parent.best.threshold;

    GrowingLeaf left, right;
    left.depth = right.depth = parent.depth + 1;
    for (int r : parent.sorted[0]) {
      const bool go_left = data_[static_cast<std::size_t>(r)].x[feat] <= thr;
      goes_left_[static_cast<std::size_t>(r)] = go_left ? 1 : 0;
      GrowingLeaf& side = go_left ? left : right;
      side.grad += grad_[static_cast<std::size_t>(r)];
      side.hess += hess_[static_cast<std::size_t>(r)];
    }
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      for (int r : parent.sorted[j]) {
        (goes_left_[static_cast<std::size_t>(r)] ? left : right).sorted[j].push_back(r);
      }
    }

    left.node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    right.node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    TreeNode& node = tree.nodes[static_cast<std::size_t>(parent.node)];
    node.feature = static_cast<int>(feat);
    node.threshold = thr;
    node.left = left.node;
    node.right = right.node;

    find_best_split(left);
    find_best_split(right);
    return {std::move(left), std::move(right)};
  }

  std::span<const LabeledFeatures> data_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const TrainConfig& config_;
  std::vector<char> goes_left_;
};

}  // namespace

TreeEnsemble train(std::span<const LabeledFeatures> data, const TrainConfig& config) {
  config.validate();
  if (data.size() < 2) throw ConfigError("training needs at least 2 samples");
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      if (!std::isfinite(data[i].x[j])) {
        throw ValidationError("finite features", "row " + std::to_string(i) + " feature " +
                                                     std::string(symbol(feature_at(j))));
      }
    }
  }

  TreeEnsemble model;
  model.learning_rate = config.learning_rate;
  double positives = 0.0;
  for (const auto& row : data) positives += target(row.y);
  const double prior = clip(positives / static_cast<double>(data.size()));
  model.base_score = std::log(prior / (1.0 - prior));
  if (positives == 0.0 || positives == static_cast<double>(data.size())) return model;

  const std::size_t n = data.size();
  std::array<std::vector<int>, kNumFeatures> presorted;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    auto& idx = presorted[j];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return data[static_cast<std::size_t>(a)].x[j] < data[static_cast<std::size_t>(b)].x[j];
    });
  }

  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<char> in_bag(n, 1);
  const auto bag_size = static_cast<std::size_t>(
      std::max(2.0, std::round(config.row_subsample * static_cast<double>(n))));
  std::vector<std::size_t> order(n);

  for (int round = 0; round < config.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(margin[i]);
      grad[i] = p - target(data[i].y);
      hess[i] = p * (1.0 - p);
    }
    if (bag_size < n) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(mix_seed(config.seed ^ mix_seed(static_cast<std::uint64_t>(round))));
      rng.shuffle(order.begin(), order.end());
      std::fill(in_bag.begin(), in_bag.end(), 0);
      for (std::size_t i = 0; i < bag_size; ++i) in_bag[order[i]] = 1;
    }
    TreeGrower grower(data, grad, hess, config);
    Tree tree = grower.grow(presorted, in_bag);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += config.learning_rate * tree.leaf_value(data[i].x);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double log_loss(const TreeEnsemble& model, std::span<const LabeledFeatures> data) {
  double loss = 0.0;
  for (const auto& row : data) {
    const double p = clip(predict_proba(model, row.x));
    loss -= row.y == Label::Abnormal ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(data.size());
}

namespace {

json node_to_json(const Tree& tree, std::size_t i) {
  const TreeNode& n = tree.nodes[i];
  if (n.is_leaf()) return json{{"leaf", n.value}};
  return json{{"feat", n.feature},
              {"thr", n.threshold},
              {"left", node_to_json(tree, static_cast<std::size_t>(n.left))},
              {"right", node_to_json(tree, static_cast<std::size_t>(n.right))}};
}

int node_from_json(const json& j, Tree& tree, int depth) {
  if (depth > 64) throw ParseError("model: tree nesting exceeds 64 levels");
  if (!j.is_object()) throw ParseError("model: tree node must be an object");
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});
  if (j.contains("leaf")) {
    const double v = j.at("leaf").get<double>();
    if (!std::isfinite(v)) throw ParseError("model: non-finite leaf value");
    tree.nodes[static_cast<std::size_t>(id)].value = v;
    return id;
  }
  if (!j.contains("feat") || !j.contains("thr") || !j.contains("left") || !j.contains("right")) {
    throw ParseError("model: internal node needs feat, thr, left and right");
  }
  const int feat = j.at("feat").get<int>();
  if (feat < 0 || feat >= static_cast<int>(kNumFeatures)) {
    throw ParseError("model: feature index " + std::to_string(feat) + " out of range");
  }
  const double thr = j.at("thr").get<double>();
  const int left = node_from_json(j.at("left"), tree, depth + 1);
  const int right = node_from_json(j.at("right"), tree, depth + 1);
  TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
  node.feature = feat;
  node.threshold = thr;
  node.left = left;
  node.right = right;
  return id;
}

}  // namespace

std::string model_to_json(const TreeEnsemble& model) {
  json trees = json::array();
  for (const Tree& t : model.trees) trees.push_back(node_to_json(t, 0));
  const json doc = {{"format_version", 1},
                    {"base_score", model.base_score},
                    {"learning_rate", model.learning_rate},
                    {"feature_names", model.feature_names},
                    {"trees", std::move(trees)}};
  return doc.dump();
}

TreeEnsemble model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  try {
    TreeEnsemble model;
    model.base_score = doc.at("base_score").get<double>();
    model.learning_rate = doc.at("learning_rate").get<double>();
    if (doc.contains("feature_names")) {
      const auto names = doc.at("feature_names").get<std::vector<std::string>>();
      if (names != model.feature_names) {
        throw ParseError("model: feature_names do not match the canonical feature order");
      }
    }
    for (const auto& t : doc.at("trees")) {
      Tree tree;
      node_from_json(t, tree, 0);
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TreeEnsemble& model) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write model '" + path.string() + "'");
  out << model_to_json(model) << '\n';
}

TreeEnsemble load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace battdiag

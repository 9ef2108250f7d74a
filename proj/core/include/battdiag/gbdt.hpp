#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "battdiag/features.hpp"

namespace battdiag {

// Flat binary tree. Node 0 is the root. An internal node sends a value left
// iff value <= threshold.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf margin contribution before learning-rate scaling

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  // Index of the leaf reached by x.
  std::size_t leaf_index(const FeatureVector& x) const;
  double leaf_value(const FeatureVector& x) const { return nodes[leaf_index(x)].value; }
  std::size_t depth() const;
  std::size_t n_leaves() const;

  static Tree leaf(double value) { return Tree{{TreeNode{.value = value}}}; }
};

struct TreeEnsemble {
  double base_score = 0.0;  // log-odds of the training prior
  double learning_rate = 1.0;
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;  // canonical symbols

  TreeEnsemble();
};

struct TrainConfig {
  int n_trees = 100;
  double learning_rate = 0.1;
  int max_leaves = 31;
  int min_samples_leaf = 20;
  double l2_leaf_penalty = 1.0;
  int max_depth = 30;
  double min_child_hessian = 1e-3;
  double row_subsample = 1.0;  // fraction of rows drawn (without replacement) per tree
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledFeatures {
  FeatureVector x;
  Label y = Label::Normal;
};

inline constexpr double kProbabilityClip = 1e-9;

// Logistic-loss boosting with exact greedy split search and best-first leaf
// growth. Leaf values are -G / (H + l2). A single-class input yields a
// model with no trees.
TreeEnsemble train(std::span<const LabeledFeatures> data, const TrainConfig& config = {});

// base_score + learning_rate * sum of leaf values.
double predict_margin(const TreeEnsemble& model, const FeatureVector& x);
double predict_proba(const TreeEnsemble& model, const FeatureVector& x);

// Numerically stable logistic.
double logistic(double margin);

// Mean binary cross-entropy with probabilities clipped to [1e-9, 1 - 1e-9].
double log_loss(const TreeEnsemble& model, std::span<const LabeledFeatures> data);

// JSON model format:
//   {"format_version": 1, "base_score": b, "learning_rate": lr,
//    "feature_names": [...], "trees": [node...]}
// where node is {"feat": i, "thr": t, "left": node, "right": node} or
// {"leaf": v}. Unknown keys are ignored.
std::string model_to_json(const TreeEnsemble& model);
TreeEnsemble model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const TreeEnsemble& model);
TreeEnsemble load_model(const std::filesystem::path& path);

}  // namespace battdiag

#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "battdiag/error.hpp"
#include "battdiag/gbdt.hpp"
#include "battdiag/metrics.hpp"
#include "battdiag/rng.hpp"
#include "support.hpp"

namespace battdiag {
namespace {

TreeEnsemble stump_on_dt() {
  TreeEnsemble model;
  model.base_score = 0.0;
  model.learning_rate = 1.0;
  Tree tree;
  tree.nodes = {TreeNode{.feature = static_cast<int>(index(Feature::MaxTempDifference)),
                         .threshold = 5.0,
                         .left = 1,
                         .right = 2},
                TreeNode{.value = -1.0}, TreeNode{.value = 1.0}};
  model.trees.push_back(tree);
  return model;
}

double training_auroc(const TreeEnsemble& model, const std::vector<LabeledFeatures>& data) {
  std::vector<ScoredLabel> scores;
  for (const auto& d : data) scores.push_back({predict_margin(model, d.x), d.y});
  return auroc(scores);
}

std::vector<LabeledFeatures> separable_on_dt(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledFeatures> data;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledFeatures d;
    for (auto& v : d.x.values) v = rng.uniform(0.0, 10.0);
    d.y = d.x[Feature::MaxTempDifference] > 5.0 ? Label::Abnormal : Label::Normal;
    data.push_back(d);
  }
  return data;
}

std::vector<LabeledFeatures> xor_on_cc_corr(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledFeatures> data;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledFeatures d;
    for (auto& v : d.x.values) v = rng.uniform(0.0, 1.0);
    const bool a = d.x[Feature::CcRatio] > 0.5;
    const bool b = d.x[Feature::VoltageCorrelation] > 0.5;
    d.y = a != b ? Label::Abnormal : Label::Normal;
    data.push_back(d);
  }
  return data;
}

TEST(Predict, BaseOnlyModel) {
  TreeEnsemble model;
  model.base_score = -0.7;
  FeatureVector x;
  x[Feature::Cycles] = 123.0;
  EXPECT_EQ(predict_margin(model, x), -0.7);
}

TEST(Predict, StumpPathTrace) {
  const auto model = stump_on_dt();
  FeatureVector x;
  x[Feature::MaxTempDifference] = 7.0;
  EXPECT_EQ(predict_margin(model, x), 1.0);
  x[Feature::MaxTempDifference] = 5.0;
  EXPECT_EQ(predict_margin(model, x), -1.0);
}

TEST(Predict, LearningRateScalesLeaves) {
  auto model = stump_on_dt();
  model.base_score = 0.25;
  model.learning_rate = 0.1;
  FeatureVector x;
  x[Feature::MaxTempDifference] = 9.0;
  EXPECT_DOUBLE_EQ(predict_margin(model, x), 0.35);
}

TEST(Logistic, Fixtures) {
  EXPECT_EQ(logistic(0.0), 0.5);
  EXPECT_GE(logistic(50.0), 1.0 - 1e-9);
  EXPECT_LE(logistic(-50.0), 1e-9);
  EXPECT_TRUE(std::isfinite(logistic(1e6)));
  EXPECT_TRUE(std::isfinite(logistic(-1e6)));
  EXPECT_NEAR(logistic(std::log(3.0)), 0.75, 1e-15);
}

TEST(Train, SingleClassGivesClippedPrior) {
  std::vector<LabeledFeatures> data(30);
  for (auto& d : data) d.y = Label::Abnormal;
  const auto model = train(data);
  EXPECT_TRUE(model.trees.empty());
  EXPECT_NEAR(model.base_score, std::log((1.0 - kProbabilityClip) / kProbabilityClip), 1e-6);
  EXPECT_GE(predict_proba(model, FeatureVector{}), 1.0 - 1e-8);
}

TEST(Train, BaseScoreIsPriorLogOdds) {
  auto data = separable_on_dt(200, 1);
  const double pos = static_cast<double>(
      std::count_if(data.begin(), data.end(), [](auto& d) { return d.y == Label::Abnormal; }));
  const auto model = train(data, {.n_trees = 1});
  EXPECT_NEAR(model.base_score, std::log(pos / (200.0 - pos)), 1e-12);
}

TEST(Train, SeparableWithinTenTrees) {
  const auto data = separable_on_dt(200, 2);
  const auto model = train(data, {.n_trees = 10});
  EXPECT_LE(model.trees.size(), 10u);
  EXPECT_EQ(training_auroc(model, data), 1.0);
}

TEST(Train, XorNeedsInteraction) {
  const auto data = xor_on_cc_corr(400, 3);
  const auto model = train(data, {.max_leaves = 4});
  EXPECT_GE(training_auroc(model, data), 0.99);
}

TEST(Train, DeterministicForSameInputs) {
  const auto data = xor_on_cc_corr(300, 4);
  TrainConfig cfg{.n_trees = 20, .row_subsample = 0.7, .seed = 11};
  EXPECT_EQ(model_to_json(train(data, cfg)), model_to_json(train(data, cfg)));
}

TEST(Train, SubsampleSeedChangesTheModel) {
  const auto data = xor_on_cc_corr(300, 4);
  TrainConfig a{.n_trees = 5, .row_subsample = 0.5, .seed = 1};
  TrainConfig b = a;
  b.seed = 2;
  EXPECT_NE(model_to_json(train(data, a)), model_to_json(train(data, b)));
}

TEST(Train, RejectsBadInput) {
  EXPECT_THROW(train(std::vector<LabeledFeatures>{}), ConfigError);
  auto data = separable_on_dt(50, 5);
  data[7].x[Feature::CcRatio] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train(data), ValidationError);
  EXPECT_THROW(train(separable_on_dt(50, 5), {.n_trees = 0}), ConfigError);
  EXPECT_THROW(train(separable_on_dt(50, 5), {.learning_rate = 0.0}), ConfigError);
}

// --- properties --------------------------------------------------------------

class TrainedProperties : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = xor_on_cc_corr(400, 6);
    // Label noise keeps every round productive.
    Rng rng(6);
    for (auto& d : data_) {
      if (rng.uniform() < 0.1) d.y = d.y == Label::Normal ? Label::Abnormal : Label::Normal;
    }
    model_ = train(data_, {.n_trees = 40, .max_leaves = 8, .min_samples_leaf = 5, .max_depth = 4});
  }
  std::vector<LabeledFeatures> data_;
  TreeEnsemble model_;
};

TEST_F(TrainedProperties, LossNonIncreasingPerRound) {
  TreeEnsemble prefix = model_;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r <= model_.trees.size(); ++r) {
    prefix.trees.assign(model_.trees.begin(), model_.trees.begin() + static_cast<long>(r));
    const double loss = log_loss(prefix, data_);
    ASSERT_LE(loss, previous + 1e-12) << "round " << r;
    previous = loss;
  }
}

TEST_F(TrainedProperties, StructureIsValid) {
  for (const Tree& tree : model_.trees) {
    EXPECT_LE(tree.depth(), 4u);
    EXPECT_LE(tree.n_leaves(), 8u);
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf()) continue;
      ASSERT_GE(node.feature, 0);
      ASSERT_LT(node.feature, static_cast<int>(kNumFeatures));
      ASSERT_GT(node.left, 0);
      ASSERT_GT(node.right, 0);
      // Threshold lies between two observed training values.
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      bool below = false, above = false;
      for (const auto& d : data_) {
        const double v = d.x[static_cast<std::size_t>(node.feature)];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        below |= v <= node.threshold;
        above |= v > node.threshold;
      }
      EXPECT_TRUE(below && above);
      EXPECT_GE(node.threshold, lo);
      EXPECT_LT(node.threshold, hi);
    }
  }
}

TEST_F(TrainedProperties, ThresholdTiesDescendLeft) {
  for (const Tree& tree : model_.trees) {
    const TreeNode& root = tree.nodes[0];
    if (root.is_leaf()) continue;
    FeatureVector x;
    x[static_cast<std::size_t>(root.feature)] = root.threshold;
    const std::size_t leaf = tree.leaf_index(x);
    // Descend by hand from the root's left child.
    std::size_t node = static_cast<std::size_t>(root.left);
    while (!tree.nodes[node].is_leaf()) {
      const auto& n = tree.nodes[node];
      node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                             : n.right);
    }
    EXPECT_EQ(leaf, node);
  }
}

TEST_F(TrainedProperties, ProbabilitiesInOpenInterval) {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    FeatureVector x;
    for (auto& v : x.values) v = rng.uniform(-1e3, 1e3);
    const double m = predict_margin(model_, x);
    const double p = predict_proba(model_, x);
    ASSERT_TRUE(std::isfinite(m));
    ASSERT_GT(p, 0.0);
    ASSERT_LT(p, 1.0);
  }
}

TEST_F(TrainedProperties, JsonRoundTripIsExact) {
  const std::string text = model_to_json(model_);
  const TreeEnsemble back = model_from_json(text);
  EXPECT_EQ(model_to_json(back), text);
  for (const auto& d : data_) ASSERT_EQ(predict_margin(back, d.x), predict_margin(model_, d.x));
}

TEST(ModelJson, UnknownKeysIgnoredAndBadTreesRejected) {
  const std::string ok = R"({"format_version": 1, "base_score": 0.5, "learning_rate": 1,
      "comment": "x", "trees": [{"feat": 7, "thr": 5, "left": {"leaf": -1}, "right": {"leaf": 1}}]})";
  const auto model = model_from_json(ok);
  FeatureVector x;
  x[Feature::MaxTempDifference] = 6.0;
  EXPECT_EQ(predict_margin(model, x), 1.5);

  EXPECT_THROW(model_from_json(R"({"trees": [{"feat": 11, "thr": 0,
      "left": {"leaf": 0}, "right": {"leaf": 0}}]})"),
               ParseError);
  EXPECT_THROW(model_from_json(R"({"trees": [{"feat": 1, "thr": 0, "left": {"leaf": 0}}]})"),
               ParseError);
  EXPECT_THROW(model_from_json("not json"), ParseError);
  EXPECT_THROW(model_from_json(R"({"feature_names": ["a"], "trees": []})"), ParseError);
}

TEST(ModelJson, SaveAndLoad) {
  testing::TempDir dir("model");
  const auto model = train(separable_on_dt(100, 9), {.n_trees = 5});
  save_model(dir / "m.json", model);
  EXPECT_EQ(model_to_json(load_model(dir / "m.json")), model_to_json(model));
  EXPECT_THROW(load_model(dir / "missing.json"), ConfigError);
}

}  // namespace
}  // namespace battdiag

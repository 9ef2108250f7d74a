#include "battdiag/attribution.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "battdiag/error.hpp"

namespace battdiag {

namespace {

constexpr std::array<double, kNumFeatures + 1> make_factorials() {
  std::array<double, kNumFeatures + 1> f{};
  f[0] = 1.0;
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * static_cast<double>(i);
  return f;
}

constexpr auto kFactorial = make_factorials();

using FeatureMask = std::uint32_t;

// Shapley values of one tree's game v(S) = tree(x_S, z_rest). A leaf is
// reachable in the hybrid iff every feature on which x alone leads there
// (set A) is in S and every feature on which z alone leads there (set B) is
// not. The Shapley value of that indicator game is (a-1)! b! / (a+b)! for
// members of A and -a! (b-1)! / (a+b)! for members of B.
class InterventionalPath {
 public:
  InterventionalPath(const Tree& tree, const FeatureVector& x, const FeatureVector& z,
                     double scale, std::array<double, kNumFeatures>& phi)
      : tree_(tree), x_(x), z_(z), scale_(scale), phi_(phi) {}

  void run() { visit(0, 0, 0, 0, 0); }

 private:
  void visit(std::size_t node, FeatureMask in_x, FeatureMask in_z, int a, int b) {
    const TreeNode& n = tree_.nodes[node];
    if (n.is_leaf()) {
      if (a + b == 0) return;
      const double v = scale_ * n.value;
      const double total = kFactorial[static_cast<std::size_t>(a + b)];
      if (a > 0) {
        const double w = kFactorial[static_cast<std::size_t>(a - 1)] *
                         kFactorial[static_cast<std::size_t>(b)] / total;
        for (std::size_t j = 0; j < kNumFeatures; ++j) {
          if (in_x & (1U << j)) phi_[j] += v * w;
        }
      }
      if (b > 0) {
        const double w = kFactorial[static_cast<std::size_t>(a)] *
                         kFactorial[static_cast<std::size_t>(b - 1)] / total;
        for (std::size_t j = 0; j < kNumFeatures; ++j) {
          if (in_z & (1U << j)) phi_[j] -= v * w;
        }
      }
      return;
    }
    const auto j = static_cast<std::size_t>(n.feature);
    const FeatureMask bit = 1U << j;
    const auto x_child = static_cast<std::size_t>(x_[j] <= n.threshold ? n.left : n.right);
    const auto z_child = static_cast<std::size_t>(z_[j] <= n.threshold ? n.left : n.right);
    if (x_child == z_child) {
      visit(x_child, in_x, in_z, a, b);
    } else if (in_x & bit) {
      visit(x_child, in_x, in_z, a, b);
    } else if (in_z & bit) {
      visit(z_child, in_x, in_z, a, b);
    } else {
      visit(x_child, in_x | bit, in_z, a + 1, b);
      visit(z_child, in_x, in_z | bit, a, b + 1);
    }
  }

  const Tree& tree_;
  const FeatureVector& x_;
  const FeatureVector& z_;
  double scale_;
  std::array<double, kNumFeatures>& phi_;
};

void require_background(std::span<const FeatureVector> background) {
  if (background.empty()) throw ConfigError("attribution needs a non-empty background");
}

}  // namespace

double Attribution::total() const {
  return std::accumulate(phi.begin(), phi.end(), base_value);
}

void normalize_weights(Attribution& attr) {
  double sum = 0.0;
  for (double p : attr.phi) sum += std::abs(p);
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    attr.weights[j] = sum > 0.0 ? std::abs(attr.phi[j]) / sum : 0.0;
  }
}

Attribution tree_shap(const TreeEnsemble& model, const FeatureVector& x,
                      std::span<const FeatureVector> background) {
  require_background(background);
  Attribution attr;
  double base_sum = 0.0;
  for (const FeatureVector& z : background) {
    base_sum += predict_margin(model, z);
    for (const Tree& tree : model.trees) {
      InterventionalPath(tree, x, z, model.learning_rate, attr.phi).run();
    }
  }
  const double n = static_cast<double>(background.size());
  attr.base_value = base_sum / n;
  for (double& p : attr.phi) p /= n;
  normalize_weights(attr);
  return attr;
}

Attribution brute_force_shap(const TreeEnsemble& model, const FeatureVector& x,
                             std::span<const FeatureVector> background) {
  require_background(background);
  constexpr std::size_t kSubsets = std::size_t{1} << kNumFeatures;
  const double n_bg = static_cast<double>(background.size());

  std::vector<double> value(kSubsets, 0.0);
  for (std::size_t mask = 0; mask < kSubsets; ++mask) {
    double sum = 0.0;
    for (const FeatureVector& z : background) {
      FeatureVector hybrid = z;
      for (std::size_t j = 0; j < kNumFeatures; ++j) {
        if (mask & (std::size_t{1} << j)) hybrid[j] = x[j];
      }
      sum += predict_margin(model, hybrid);
    }
    value[mask] = sum / n_bg;
  }

  Attribution attr;
  attr.base_value = value[0];
  const double n_fact = kFactorial[kNumFeatures];
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double phi = 0.0;
    for (std::size_t mask = 0; mask < kSubsets; ++mask) {
      if (mask & bit) continue;
      const auto s = static_cast<std::size_t>(std::popcount(mask));
      const double w = kFactorial[s] * kFactorial[kNumFeatures - s - 1] / n_fact;
      phi += w * (value[mask | bit] - value[mask]);
    }
    attr.phi[i] = phi;
  }
  normalize_weights(attr);
  return attr;
}

std::vector<FeatureVector> subsample_background(std::span<const FeatureVector> rows,
                                                std::size_t cap) {
  if (rows.size() <= cap || cap == 0) return {rows.begin(), rows.end()};
  const std::size_t stride = (rows.size() + cap - 1) / cap;
  std::vector<FeatureVector> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < rows.size(); i += stride) out.push_back(rows[i]);
  return out;
}

Attribution select_top_k(Attribution attr, std::size_t k) {
  normalize_weights(attr);
  std::array<std::size_t, kNumFeatures> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(attr.phi[a]) > std::abs(attr.phi[b]);
  });
  k = std::min(k, kNumFeatures);
  attr.top_k.clear();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = order[i];
    attr.top_k.push_back({feature_at(j), attr.phi[j], attr.weights[j]});
  }
  return attr;
}

}  // namespace battdiag

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "battdiag/features.hpp"
#include "battdiag/gbdt.hpp"

namespace battdiag {

struct Contribution {
  Feature feature;
  double phi = 0.0;
  double weight = 0.0;
};

// Shapley decomposition of a model margin. weights[j] = |phi_j| / sum |phi|
// over all features (all zero when every phi is zero).
struct Attribution {
  double base_value = 0.0;
  std::array<double, kNumFeatures> phi{};
  std::array<double, kNumFeatures> weights{};
  std::vector<Contribution> top_k;

  double total() const;  // base_value + sum(phi)
};

inline constexpr std::size_t kMaxBackgroundRows = 512;
inline constexpr std::size_t kDefaultTopK = 8;

// Interventional Shapley values in margin space. For every background row
// the per-tree game v(S) = f(x_S, z_rest) is solved exactly by a path
// recursion; results are averaged over rows. base_value is the mean
// background margin. Throws ConfigError for an empty background.
Attribution tree_shap(const TreeEnsemble& model, const FeatureVector& x,
                      std::span<const FeatureVector> background);

// Same quantity by enumerating all 2^10 coalitions. Test oracle.
Attribution brute_force_shap(const TreeEnsemble& model, const FeatureVector& x,
                             std::span<const FeatureVector> background);

// Deterministic stride subsample down to at most `cap` rows.
std::vector<FeatureVector> subsample_background(std::span<const FeatureVector> rows,
                                                std::size_t cap = kMaxBackgroundRows);

// Fills top_k with the k largest |phi| (ties by feature order) and refreshes
// weights over all features.
Attribution select_top_k(Attribution attr, std::size_t k);

void normalize_weights(Attribution& attr);

}  // namespace battdiag

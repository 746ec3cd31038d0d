#pragma once

#include <cmath>
#include <vector>

#include "dream/errors.hpp"
#include "dream/rng.hpp"
#include "dream/tree.hpp"

namespace dream {

struct ForestModel {
  std::size_t num_classes = 0;
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;  // derived rng key per tree
};

struct ForestConfig {
  std::size_t trees = 100;
  std::size_t max_depth = 16;
  double feature_fraction = 0.3;
  std::uint64_t seed = 42;
};

// Each tree draws its bootstrap sample and per-split feature subsets from an
// independent counter-based stream keyed by (seed, tree index), so results
// do not depend on training order.
inline ForestModel train_forest(const std::vector<TermVector>& X, const std::vector<std::size_t>& y,
                                std::size_t num_classes, std::size_t num_features, const ForestConfig& config,
                                bool bootstrap = true) {
  if (X.empty() || X.size() != y.size()) throw Error("train_forest: bad inputs");
  if (config.trees < 1) throw ConfigError("rf_trees must be >= 1");
  if (config.feature_fraction <= 0.0 || config.feature_fraction > 1.0)
    throw ConfigError("rf_feature_fraction must be in (0, 1]");
  const std::size_t n = X.size();
  std::size_t subset = static_cast<std::size_t>(std::ceil(config.feature_fraction * static_cast<double>(num_features)));
  subset = std::min(std::max<std::size_t>(subset, 1), std::max<std::size_t>(num_features, 1));

  TreeOptions tree_options;
  tree_options.max_depth = config.max_depth;
  tree_options.feature_subset = subset;

  ForestModel model;
  model.num_classes = num_classes;
  model.trees.reserve(config.trees);
  model.tree_seeds.reserve(config.trees);
  for (std::size_t t = 0; t < config.trees; ++t) {
    CounterRng rng(config.seed, t);
    model.tree_seeds.push_back(rng.key());
    std::vector<std::size_t> samples(n);
    if (bootstrap) {
      for (std::size_t i = 0; i < n; ++i) samples[i] = rng.next_index(n);
    } else {
      for (std::size_t i = 0; i < n; ++i) samples[i] = i;
    }
    model.trees.push_back(
        train_classification_tree_on(X, y, num_classes, num_features, tree_options, &rng, std::move(samples)));
  }
  return model;
}

// Mean of the trees' leaf distributions.
inline std::vector<double> predict_proba(const ForestModel& model, const TermVector& x) {
  std::vector<double> probs(model.num_classes, 0.0);
  for (const DecisionTree& tree : model.trees) {
    const TreeNode& leaf = tree.leaf_for(x);
    for (std::size_t c = 0; c < model.num_classes; ++c) probs[c] += leaf.value[c];
  }
  for (double& p : probs) p /= static_cast<double>(model.trees.size());
  return probs;
}

}  // namespace dream

#pragma once

#include <cmath>
#include <vector>

#include "dream/errors.hpp"
#include "dream/tree.hpp"

namespace dream {

// One-vs-rest additive logistic models sharing a softmax read-out.
struct BoostModel {
  std::size_t num_classes = 0;
  double learning_rate = 0.1;
  std::vector<double> initial_scores;             // per-class prior log-odds
  std::vector<std::vector<DecisionTree>> stages;  // [class][stage], regression trees
};

struct BoostConfig {
  std::size_t stages = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
};

namespace detail {

inline double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// log(1 + exp(f)) - y*f without overflow.
inline double binary_logistic_loss(double score, double y) {
  return score > 0.0 ? (1.0 - y) * score + std::log1p(std::exp(-score)) : -y * score + std::log1p(std::exp(score));
}

}  // namespace detail

// Per class: scores start at the Laplace-smoothed prior log-odds; each stage
// fits a regression tree to the residuals y - sigmoid(score) (the negative
// gradient of the binary logistic loss) and adds it scaled by learning_rate.
// stage_losses, when given, records the mean binary logistic loss after
// initialization and after every stage.
inline BoostModel train_boost(const std::vector<TermVector>& X, const std::vector<std::size_t>& y,
                              std::size_t num_classes, std::size_t num_features, const BoostConfig& config,
                              std::vector<double>* stage_losses = nullptr) {
  if (X.empty() || X.size() != y.size()) throw Error("train_boost: bad inputs");
  if (config.stages < 1) throw ConfigError("gb_stages must be >= 1");
  if (config.learning_rate <= 0.0) throw ConfigError("gb_learning_rate must be > 0");
  const std::size_t n = X.size();

  BoostModel model;
  model.num_classes = num_classes;
  model.learning_rate = config.learning_rate;
  model.initial_scores.resize(num_classes);
  model.stages.assign(num_classes, {});

  std::vector<std::vector<double>> binary(num_classes, std::vector<double>(n, 0.0));
  std::vector<std::size_t> class_counts(num_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] >= num_classes) throw Error("train_boost: label out of range");
    binary[y[i]][i] = 1.0;
    ++class_counts[y[i]];
  }
  std::vector<std::vector<double>> scores(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double prior = (static_cast<double>(class_counts[c]) + 1.0) /
                         (static_cast<double>(n) + static_cast<double>(num_classes));
    model.initial_scores[c] = std::log(prior / (1.0 - prior));
    scores[c].assign(n, model.initial_scores[c]);
    model.stages[c].reserve(config.stages);
  }

  const auto mean_loss = [&]() {
    double total = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c)
      for (std::size_t i = 0; i < n; ++i) total += detail::binary_logistic_loss(scores[c][i], binary[c][i]);
    return total / (static_cast<double>(n) * static_cast<double>(num_classes));
  };
  if (stage_losses) {
    stage_losses->clear();
    stage_losses->push_back(mean_loss());
  }

  TreeOptions tree_options;
  tree_options.max_depth = config.max_depth;
  std::vector<double> residuals(n);
  for (std::size_t s = 0; s < config.stages; ++s) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      for (std::size_t i = 0; i < n; ++i) residuals[i] = binary[c][i] - detail::sigmoid(scores[c][i]);
      DecisionTree tree = train_regression_tree(X, residuals, num_features, tree_options);
      for (std::size_t i = 0; i < n; ++i) scores[c][i] += config.learning_rate * tree.leaf_for(X[i]).value[0];
      model.stages[c].push_back(std::move(tree));
    }
    if (stage_losses) stage_losses->push_back(mean_loss());
  }
  return model;
}

// Softmax over the per-class additive scores.
inline std::vector<double> predict_proba(const BoostModel& model, const TermVector& x) {
  std::vector<double> z(model.num_classes);
  for (std::size_t c = 0; c < model.num_classes; ++c) {
    double s = model.initial_scores[c];
    for (const DecisionTree& tree : model.stages[c]) s += model.learning_rate * tree.leaf_for(x).value[0];
    z[c] = s;
  }
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

}  // namespace dream

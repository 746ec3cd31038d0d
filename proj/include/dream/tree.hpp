#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dream/errors.hpp"
#include "dream/features.hpp"
#include "dream/rng.hpp"

namespace dream {

// feature < 0 marks a leaf; value holds a class distribution for
// classification trees and a single mean for regression trees.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> value;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const TermVector& x) const {
    int idx = 0;
    while (nodes[idx].feature >= 0) {
      const TreeNode& n = nodes[idx];
      idx = x.value_at(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes[idx];
  }
};

struct TreeOptions {
  std::size_t max_depth = 16;
  std::size_t min_samples_split = 2;
  std::size_t feature_subset = 0;  // candidate features per split; 0 = all
};

namespace detail {

// Greedy CART over sparse rows. Candidate thresholds are midpoints between
// consecutive distinct values of a feature within the node; the implicit
// zeros of sparse rows form one value group. Left branch takes value <= t.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<TermVector>& X, const std::vector<std::size_t>* labels, std::size_t num_classes,
              const std::vector<double>* targets, std::size_t num_features, const TreeOptions& options,
              CounterRng* rng)
      : x_(X), labels_(labels), num_classes_(num_classes), targets_(targets), num_features_(num_features),
        options_(options), rng_(rng) {}

  DecisionTree build() {
    std::vector<std::size_t> samples(x_.size());
    std::iota(samples.begin(), samples.end(), 0);
    DecisionTree tree;
    build_node(tree, samples, 0);
    return tree;
  }

  DecisionTree build_on(std::vector<std::size_t> samples) {
    DecisionTree tree;
    build_node(tree, samples, 0);
    return tree;
  }

 private:
  struct ValueGroup {
    double value = 0.0;
    double n = 0.0;
    std::vector<double> class_counts;  // classification only
    double sum = 0.0;                  // regression only
    double sumsq = 0.0;
  };

  bool classification() const { return labels_ != nullptr; }

  std::vector<double> leaf_value(const std::vector<std::size_t>& samples) const {
    if (classification()) {
      std::vector<double> dist(num_classes_, 0.0);
      for (std::size_t i : samples) dist[(*labels_)[i]] += 1.0;
      for (double& d : dist) d /= static_cast<double>(samples.size());
      return dist;
    }
    double sum = 0.0;
    for (std::size_t i : samples) sum += (*targets_)[i];
    return {sum / static_cast<double>(samples.size())};
  }

  bool pure(const std::vector<std::size_t>& samples) const {
    if (classification()) {
      const std::size_t first = (*labels_)[samples[0]];
      for (std::size_t i : samples)
        if ((*labels_)[i] != first) return false;
      return true;
    }
    const double first = (*targets_)[samples[0]];
    for (std::size_t i : samples)
      if ((*targets_)[i] != first) return false;
    return true;
  }

  static double gini(const std::vector<double>& counts, double n) {
    double g = 1.0;
    for (double c : counts) g -= (c / n) * (c / n);
    return g;
  }

  static double variance(double sum, double sumsq, double n) {
    const double mean = sum / n;
    return std::max(sumsq / n - mean * mean, 0.0);
  }

  double impurity(const ValueGroup& g) const {
    return classification() ? gini(g.class_counts, g.n) : variance(g.sum, g.sumsq, g.n);
  }

  void accumulate(ValueGroup& g, std::size_t sample) const {
    g.n += 1.0;
    if (classification()) {
      g.class_counts[(*labels_)[sample]] += 1.0;
    } else {
      const double t = (*targets_)[sample];
      g.sum += t;
      g.sumsq += t * t;
    }
  }

  ValueGroup empty_group(double value) const {
    ValueGroup g;
    g.value = value;
    if (classification()) g.class_counts.assign(num_classes_, 0.0);
    return g;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t m = options_.feature_subset;
    if (m == 0 || m >= num_features_ || rng_ == nullptr) {
      std::vector<std::size_t> all(num_features_);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    std::vector<std::size_t> pool(num_features_);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + rng_->next_index(num_features_ - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  struct Split {
    bool found = false;
    double gain = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
  };

  void consider(Split& best, double gain, std::size_t feature, double threshold) const {
    if (gain <= 0.0) return;
    if (best.found) {
      if (gain < best.gain) return;
      if (gain == best.gain && feature > best.feature) return;
      if (gain == best.gain && feature == best.feature && threshold >= best.threshold) return;
    }
    best = {true, gain, feature, threshold};
  }

  int build_node(DecisionTree& tree, const std::vector<std::size_t>& samples, std::size_t depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::size_t n = samples.size();
    if (depth >= options_.max_depth || n < options_.min_samples_split || pure(samples)) {
      tree.nodes[index].value = leaf_value(samples);
      return index;
    }

    const std::vector<std::size_t> features = candidate_features();
    std::vector<char> mask(num_features_, 0);
    for (std::size_t f : features) mask[f] = 1;

    // All (feature, value, sample) nonzeros of this node, grouped by feature.
    struct Entry {
      std::size_t feature;
      double value;
      std::size_t sample;
    };
    std::vector<Entry> entries;
    for (std::size_t i : samples)
      for (const auto& [idx, value] : x_[i].entries)
        if (mask[idx]) entries.push_back({idx, value, i});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.feature != b.feature) return a.feature < b.feature;
      return a.value < b.value;
    });

    ValueGroup total = empty_group(0.0);
    for (std::size_t i : samples) accumulate(total, i);
    const double parent_impurity = impurity(total);

    Split best;
    std::vector<ValueGroup> groups;
    std::size_t pos = 0;
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      const std::size_t f = features[fi];
      groups.clear();
      double nonzero_n = 0.0;
      while (pos < entries.size() && entries[pos].feature == f) {
        if (groups.empty() || groups.back().value != entries[pos].value) groups.push_back(empty_group(entries[pos].value));
        accumulate(groups.back(), entries[pos].sample);
        nonzero_n += 1.0;
        ++pos;
      }
      if (nonzero_n < static_cast<double>(n)) {
        // Implicit-zero group = node totals minus the nonzero groups,
        // inserted at its sorted position.
        ValueGroup zeros = total;
        zeros.value = 0.0;
        for (const ValueGroup& g : groups) {
          zeros.n -= g.n;
          if (classification())
            for (std::size_t c = 0; c < num_classes_; ++c) zeros.class_counts[c] -= g.class_counts[c];
          else {
            zeros.sum -= g.sum;
            zeros.sumsq -= g.sumsq;
          }
        }
        const auto it = std::lower_bound(groups.begin(), groups.end(), 0.0,
                                         [](const ValueGroup& g, double v) { return g.value < v; });
        groups.insert(it, std::move(zeros));
      }
      if (groups.size() < 2) continue;

      ValueGroup left = empty_group(0.0);
      for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        left.n += groups[g].n;
        if (classification())
          for (std::size_t c = 0; c < num_classes_; ++c) left.class_counts[c] += groups[g].class_counts[c];
        else {
          left.sum += groups[g].sum;
          left.sumsq += groups[g].sumsq;
        }
        ValueGroup right = empty_group(0.0);
        right.n = total.n - left.n;
        if (classification())
          for (std::size_t c = 0; c < num_classes_; ++c) right.class_counts[c] = total.class_counts[c] - left.class_counts[c];
        else {
          right.sum = total.sum - left.sum;
          right.sumsq = total.sumsq - left.sumsq;
        }
        const double threshold = (groups[g].value + groups[g + 1].value) / 2.0;
        // Nearly-equal neighbors can round the midpoint onto the upper value,
        // which would send both groups left; such a candidate cannot separate.
        if (!(groups[g].value <= threshold && threshold < groups[g + 1].value)) continue;
        const double gain =
            parent_impurity - (left.n / total.n) * impurity(left) - (right.n / total.n) * impurity(right);
        consider(best, gain, f, threshold);
      }
    }

    if (!best.found) {
      tree.nodes[index].value = leaf_value(samples);
      return index;
    }

    std::vector<std::size_t> left_samples, right_samples;
    for (std::size_t i : samples) {
      if (x_[i].value_at(best.feature) <= best.threshold)
        left_samples.push_back(i);
      else
        right_samples.push_back(i);
    }
    tree.nodes[index].feature = static_cast<int>(best.feature);
    tree.nodes[index].threshold = best.threshold;
    const int left_idx = build_node(tree, left_samples, depth + 1);
    const int right_idx = build_node(tree, right_samples, depth + 1);
    tree.nodes[index].left = left_idx;
    tree.nodes[index].right = right_idx;
    return index;
  }

  const std::vector<TermVector>& x_;
  const std::vector<std::size_t>* labels_;
  std::size_t num_classes_;
  const std::vector<double>* targets_;
  std::size_t num_features_;
  TreeOptions options_;
  CounterRng* rng_;
};

}  // namespace detail

inline DecisionTree train_classification_tree(const std::vector<TermVector>& X, const std::vector<std::size_t>& y,
                                              std::size_t num_classes, std::size_t num_features,
                                              const TreeOptions& options, CounterRng* rng = nullptr) {
  if (X.empty() || X.size() != y.size()) throw Error("train_classification_tree: bad inputs");
  return detail::TreeBuilder(X, &y, num_classes, nullptr, num_features, options, rng).build();
}

inline DecisionTree train_classification_tree_on(const std::vector<TermVector>& X, const std::vector<std::size_t>& y,
                                                 std::size_t num_classes, std::size_t num_features,
                                                 const TreeOptions& options, CounterRng* rng,
                                                 std::vector<std::size_t> samples) {
  if (samples.empty()) throw Error("train_classification_tree: empty sample set");
  return detail::TreeBuilder(X, &y, num_classes, nullptr, num_features, options, rng).build_on(std::move(samples));
}

inline DecisionTree train_regression_tree(const std::vector<TermVector>& X, const std::vector<double>& targets,
                                          std::size_t num_features, const TreeOptions& options,
                                          CounterRng* rng = nullptr) {
  if (X.empty() || X.size() != targets.size()) throw Error("train_regression_tree: bad inputs");
  return detail::TreeBuilder(X, nullptr, 0, &targets, num_features, options, rng).build();
}

}  // namespace dream

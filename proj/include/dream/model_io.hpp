#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dream/ensemble.hpp"
#include "dream/errors.hpp"
#include "dream/version.hpp"

namespace dream {

namespace detail {

using Json = nlohmann::json;

inline const Json& require_field(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(std::string(where) + ": missing field '" + key + "'");
  return j.at(key);
}

template <typename T>
inline T require_as(const Json& j, const char* key, const char* where) {
  try {
    return require_field(j, key, where).get<T>();
  } catch (const Json::exception&) {
    throw Error(std::string(where) + ": invalid field '" + key + "'");
  }
}

inline Json tree_to_json(const DecisionTree& tree) {
  Json nodes = Json::array();
  for (const TreeNode& n : tree.nodes) {
    Json node;
    if (n.feature < 0) {
      node["v"] = n.value;
    } else {
      node["f"] = n.feature;
      node["t"] = n.threshold;
      node["l"] = n.left;
      node["r"] = n.right;
    }
    nodes.push_back(std::move(node));
  }
  return Json{{"nodes", std::move(nodes)}};
}

inline DecisionTree tree_from_json(const Json& j, const char* where) {
  DecisionTree tree;
  for (const Json& node : require_field(j, "nodes", where)) {
    TreeNode n;
    if (node.contains("f")) {
      n.feature = require_as<int>(node, "f", where);
      n.threshold = require_as<double>(node, "t", where);
      n.left = require_as<int>(node, "l", where);
      n.right = require_as<int>(node, "r", where);
    } else {
      n.value = require_as<std::vector<double>>(node, "v", where);
    }
    tree.nodes.push_back(std::move(n));
  }
  if (tree.nodes.empty()) throw Error(std::string(where) + ": empty tree");
  for (const TreeNode& n : tree.nodes)
    if (n.feature >= 0 && (n.left < 0 || n.right < 0 || n.left >= static_cast<int>(tree.nodes.size()) ||
                           n.right >= static_cast<int>(tree.nodes.size())))
      throw Error(std::string(where) + ": invalid field 'nodes' (bad child index)");
  return tree;
}

}  // namespace detail

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return nlohmann::json{
      {"anova_epsilon", c.anova_epsilon},
      {"anova_mode", to_string(c.anova_mode)},
      {"context_width", c.context_width},
      {"gb_learning_rate", c.gb_learning_rate},
      {"gb_max_depth", c.gb_max_depth},
      {"gb_stages", c.gb_stages},
      {"lr_epochs", c.lr_epochs},
      {"lr_l2", c.lr_l2},
      {"lr_learning_rate", c.lr_learning_rate},
      {"min_df", c.min_df},
      {"per_class_k", c.per_class_k},
      {"rf_feature_fraction", c.rf_feature_fraction},
      {"rf_max_depth", c.rf_max_depth},
      {"rf_trees", c.rf_trees},
      {"seed", c.seed},
      {"voting", c.voting},
  };
}

inline TrainConfig config_from_json(const nlohmann::json& j, const char* where = "config") {
  using detail::require_as;
  TrainConfig c;
  c.anova_epsilon = require_as<double>(j, "anova_epsilon", where);
  c.anova_mode = anova_mode_from_string(require_as<std::string>(j, "anova_mode", where));
  c.context_width = require_as<std::size_t>(j, "context_width", where);
  c.gb_learning_rate = require_as<double>(j, "gb_learning_rate", where);
  c.gb_max_depth = require_as<std::size_t>(j, "gb_max_depth", where);
  c.gb_stages = require_as<std::size_t>(j, "gb_stages", where);
  c.lr_epochs = require_as<std::size_t>(j, "lr_epochs", where);
  c.lr_l2 = require_as<double>(j, "lr_l2", where);
  c.lr_learning_rate = require_as<double>(j, "lr_learning_rate", where);
  c.min_df = require_as<std::size_t>(j, "min_df", where);
  c.per_class_k = require_as<std::size_t>(j, "per_class_k", where);
  c.rf_feature_fraction = require_as<double>(j, "rf_feature_fraction", where);
  c.rf_max_depth = require_as<std::size_t>(j, "rf_max_depth", where);
  c.rf_trees = require_as<std::size_t>(j, "rf_trees", where);
  c.seed = require_as<std::uint64_t>(j, "seed", where);
  c.voting = require_as<std::string>(j, "voting", where);
  return c;
}

// Canonical structured-text form: keys sorted, shortest round-trip floats,
// so identical models serialize to identical bytes.
inline std::string save_model(const AcordModel& model) {
  using detail::Json;
  Json j;
  j["format_version"] = model.format_version;
  j["config"] = config_to_json(model.config);
  j["vocabulary"] = Json{{"document_frequency", model.vocabulary.document_frequency},
                         {"terms", model.vocabulary.terms}};
  j["feature_space"] = Json{{"mode", to_string(model.feature_space.mode)},
                            {"per_class_k", model.feature_space.per_class_k},
                            {"provenance", model.feature_space.provenance},
                            {"selected", model.feature_space.selected}};
  j["logreg"] = Json{{"bias", model.logreg.bias},
                     {"num_classes", model.logreg.num_classes},
                     {"num_features", model.logreg.num_features},
                     {"weights", model.logreg.weights}};
  Json forest_trees = Json::array();
  for (const DecisionTree& t : model.forest.trees) forest_trees.push_back(detail::tree_to_json(t));
  j["forest"] = Json{{"num_classes", model.forest.num_classes},
                     {"tree_seeds", model.forest.tree_seeds},
                     {"trees", std::move(forest_trees)}};
  Json stages = Json::array();
  for (const auto& class_stages : model.boost.stages) {
    Json arr = Json::array();
    for (const DecisionTree& t : class_stages) arr.push_back(detail::tree_to_json(t));
    stages.push_back(std::move(arr));
  }
  j["boost"] = Json{{"initial_scores", model.boost.initial_scores},
                    {"learning_rate", model.boost.learning_rate},
                    {"num_classes", model.boost.num_classes},
                    {"stages", std::move(stages)}};
  return j.dump() + "\n";
}

inline AcordModel load_model(const std::string& bytes) {
  using detail::Json;
  using detail::require_as;
  using detail::require_field;
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const Json::exception& e) {
    throw Error(std::string("model file: invalid structure: ") + e.what());
  }
  const char* where = "model file";
  AcordModel m;
  m.format_version = require_as<int>(j, "format_version", where);
  if (m.format_version != kModelFormatVersion)
    throw Error("model file: unsupported format_version " + std::to_string(m.format_version) + " (supported: " +
                std::to_string(kModelFormatVersion) + ")");
  m.config = config_from_json(require_field(j, "config", where), "model file: config");

  const Json& vocab = require_field(j, "vocabulary", where);
  m.vocabulary.terms = require_as<std::vector<std::string>>(vocab, "terms", "model file: vocabulary");
  m.vocabulary.document_frequency =
      require_as<std::vector<std::size_t>>(vocab, "document_frequency", "model file: vocabulary");
  if (m.vocabulary.document_frequency.size() != m.vocabulary.terms.size())
    throw Error("model file: vocabulary: invalid field 'document_frequency'");
  for (std::size_t i = 0; i < m.vocabulary.terms.size(); ++i)
    if (!m.vocabulary.term_to_index.emplace(m.vocabulary.terms[i], i).second)
      throw Error("model file: vocabulary: invalid field 'terms' (duplicate term)");

  const Json& space = require_field(j, "feature_space", where);
  m.feature_space.mode = anova_mode_from_string(require_as<std::string>(space, "mode", "model file: feature_space"));
  m.feature_space.per_class_k = require_as<std::size_t>(space, "per_class_k", "model file: feature_space");
  m.feature_space.provenance = require_as<std::string>(space, "provenance", "model file: feature_space");
  m.feature_space.selected = require_as<std::vector<std::size_t>>(space, "selected", "model file: feature_space");
  for (std::size_t s : m.feature_space.selected)
    if (s >= m.vocabulary.size()) throw Error("model file: feature_space: invalid field 'selected'");

  const Json& lr = require_field(j, "logreg", where);
  m.logreg.num_classes = require_as<std::size_t>(lr, "num_classes", "model file: logreg");
  m.logreg.num_features = require_as<std::size_t>(lr, "num_features", "model file: logreg");
  m.logreg.bias = require_as<std::vector<double>>(lr, "bias", "model file: logreg");
  m.logreg.weights = require_as<std::vector<std::vector<double>>>(lr, "weights", "model file: logreg");
  if (m.logreg.bias.size() != m.logreg.num_classes || m.logreg.weights.size() != m.logreg.num_classes)
    throw Error("model file: logreg: invalid field 'weights'");
  for (const auto& row : m.logreg.weights)
    if (row.size() != m.logreg.num_features) throw Error("model file: logreg: invalid field 'weights'");

  const Json& forest = require_field(j, "forest", where);
  m.forest.num_classes = require_as<std::size_t>(forest, "num_classes", "model file: forest");
  m.forest.tree_seeds = require_as<std::vector<std::uint64_t>>(forest, "tree_seeds", "model file: forest");
  for (const Json& t : require_field(forest, "trees", "model file: forest"))
    m.forest.trees.push_back(detail::tree_from_json(t, "model file: forest"));
  if (m.forest.trees.size() != m.forest.tree_seeds.size())
    throw Error("model file: forest: invalid field 'tree_seeds'");

  const Json& boost = require_field(j, "boost", where);
  m.boost.num_classes = require_as<std::size_t>(boost, "num_classes", "model file: boost");
  m.boost.learning_rate = require_as<double>(boost, "learning_rate", "model file: boost");
  m.boost.initial_scores = require_as<std::vector<double>>(boost, "initial_scores", "model file: boost");
  for (const Json& class_stages : require_field(boost, "stages", "model file: boost")) {
    m.boost.stages.emplace_back();
    for (const Json& t : class_stages) m.boost.stages.back().push_back(detail::tree_from_json(t, "model file: boost"));
  }
  if (m.boost.stages.size() != m.boost.num_classes || m.boost.initial_scores.size() != m.boost.num_classes)
    throw Error("model file: boost: invalid field 'stages'");
  return m;
}

}  // namespace dream

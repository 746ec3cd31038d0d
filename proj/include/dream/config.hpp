#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dream/analysis.hpp"
#include "dream/ensemble.hpp"
#include "dream/errors.hpp"
#include "dream/model_io.hpp"
#include "dream/oracle.hpp"
#include "dream/version.hpp"

namespace dream {

// The merged view of everything a pipeline run needs. Fully resolved before
// any stage runs and echoed into every artifact.
struct RunConfig {
  TrainConfig train;
  OracleConfig oracle;
  std::string semeval_path;
  std::string corpus_path;
  std::string lexicon_path;
  std::string model_path;
  std::string prompt_template_path;  // empty = embedded default
  std::optional<int> min_year;
  std::optional<std::size_t> max_distance;
  bool keep_self_pairs = false;
  std::vector<std::optional<std::size_t>> windows = default_windows();
  double holdout = 0.0;  // evaluation fraction per class for training
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
}

}  // namespace detail

inline TrainConfig merge_train_config(TrainConfig base, const nlohmann::json& j, const char* where = "config.train") {
  detail::reject_unknown_keys(j,
                              {"anova_epsilon", "anova_mode", "context_width", "gb_learning_rate", "gb_max_depth",
                               "gb_stages", "lr_epochs", "lr_l2", "lr_learning_rate", "min_df", "per_class_k",
                               "rf_feature_fraction", "rf_max_depth", "rf_trees", "seed", "voting"},
                              where);
  try {
    if (j.contains("anova_epsilon")) base.anova_epsilon = j.at("anova_epsilon").get<double>();
    if (j.contains("anova_mode")) base.anova_mode = anova_mode_from_string(j.at("anova_mode").get<std::string>());
    if (j.contains("context_width")) base.context_width = j.at("context_width").get<std::size_t>();
    if (j.contains("gb_learning_rate")) base.gb_learning_rate = j.at("gb_learning_rate").get<double>();
    if (j.contains("gb_max_depth")) base.gb_max_depth = j.at("gb_max_depth").get<std::size_t>();
    if (j.contains("gb_stages")) base.gb_stages = j.at("gb_stages").get<std::size_t>();
    if (j.contains("lr_epochs")) base.lr_epochs = j.at("lr_epochs").get<std::size_t>();
    if (j.contains("lr_l2")) base.lr_l2 = j.at("lr_l2").get<double>();
    if (j.contains("lr_learning_rate")) base.lr_learning_rate = j.at("lr_learning_rate").get<double>();
    if (j.contains("min_df")) base.min_df = j.at("min_df").get<std::size_t>();
    if (j.contains("per_class_k")) base.per_class_k = j.at("per_class_k").get<std::size_t>();
    if (j.contains("rf_feature_fraction")) base.rf_feature_fraction = j.at("rf_feature_fraction").get<double>();
    if (j.contains("rf_max_depth")) base.rf_max_depth = j.at("rf_max_depth").get<std::size_t>();
    if (j.contains("rf_trees")) base.rf_trees = j.at("rf_trees").get<std::size_t>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("voting")) base.voting = j.at("voting").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
  return base;
}

inline nlohmann::json windows_to_json(const std::vector<std::optional<std::size_t>>& windows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& w : windows) arr.push_back(w ? nlohmann::json(*w) : nlohmann::json(nullptr));
  return arr;
}

inline nlohmann::json run_config_to_json(const RunConfig& c) {
  return nlohmann::json{
      {"extraction",
       {{"keep_self_pairs", c.keep_self_pairs},
        {"max_distance", c.max_distance ? nlohmann::json(*c.max_distance) : nlohmann::json(nullptr)}}},
      {"holdout", c.holdout},
      {"min_year", c.min_year ? nlohmann::json(*c.min_year) : nlohmann::json(nullptr)},
      {"oracle", oracle_config_to_json(c.oracle)},
      {"paths",
       {{"corpus", c.corpus_path},
        {"lexicon", c.lexicon_path},
        {"model", c.model_path},
        {"prompt_template", c.prompt_template_path},
        {"semeval", c.semeval_path}}},
      {"train", config_to_json(c.train)},
      {"windows", windows_to_json(c.windows)},
  };
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j, {"extraction", "holdout", "min_year", "oracle", "paths", "train", "windows"}, "config");
  RunConfig c;
  try {
    if (j.contains("train")) c.train = merge_train_config(c.train, j.at("train"));
    if (j.contains("oracle")) c.oracle = oracle_config_from_json(j.at("oracle"));
    if (j.contains("paths")) {
      const nlohmann::json& p = j.at("paths");
      detail::reject_unknown_keys(p, {"corpus", "lexicon", "model", "prompt_template", "semeval"}, "config.paths");
      if (p.contains("corpus")) c.corpus_path = p.at("corpus").get<std::string>();
      if (p.contains("lexicon")) c.lexicon_path = p.at("lexicon").get<std::string>();
      if (p.contains("model")) c.model_path = p.at("model").get<std::string>();
      if (p.contains("prompt_template")) c.prompt_template_path = p.at("prompt_template").get<std::string>();
      if (p.contains("semeval")) c.semeval_path = p.at("semeval").get<std::string>();
    }
    if (j.contains("extraction")) {
      const nlohmann::json& e = j.at("extraction");
      detail::reject_unknown_keys(e, {"keep_self_pairs", "max_distance"}, "config.extraction");
      if (e.contains("keep_self_pairs")) c.keep_self_pairs = e.at("keep_self_pairs").get<bool>();
      if (e.contains("max_distance") && !e.at("max_distance").is_null())
        c.max_distance = e.at("max_distance").get<std::size_t>();
    }
    if (j.contains("min_year") && !j.at("min_year").is_null()) c.min_year = j.at("min_year").get<int>();
    if (j.contains("holdout")) c.holdout = j.at("holdout").get<double>();
    if (j.contains("windows")) {
      c.windows.clear();
      for (const nlohmann::json& w : j.at("windows"))
        c.windows.push_back(w.is_null() ? std::optional<std::size_t>() : std::optional<std::size_t>(w.get<std::size_t>()));
      if (c.windows.empty()) throw ConfigError("config: empty windows list");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.holdout < 0.0 || c.holdout >= 1.0) throw ConfigError("config: holdout must be in [0, 1)");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

// Artifact header embedded in every output file.
inline nlohmann::json artifact_header(const RunConfig& config) {
  return nlohmann::json{{"config", run_config_to_json(config)}, {"tool_version", kToolVersion}};
}

inline std::string triples_to_jsonl(const std::vector<RelationTriple>& triples, const nlohmann::json& header) {
  std::string out = nlohmann::json{{"header", header}}.dump() + "\n";
  for (const RelationTriple& t : triples) out += triple_to_json(t).dump() + "\n";
  return out;
}

struct TriplesFile {
  nlohmann::json header;  // null when the file has no header line
  std::vector<RelationTriple> triples;
  std::vector<nlohmann::json> records;  // raw per-triple objects (extra fields preserved)
};

inline TriplesFile parse_triples_jsonl(std::string_view content) {
  TriplesFile out;
  std::size_t line_no = 0;
  for (const std::string& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("triples line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.is_object() && j.contains("header")) {
      out.header = j.at("header");
      continue;
    }
    out.triples.push_back(triple_from_json(j, ("triples line " + std::to_string(line_no)).c_str()));
    out.records.push_back(std::move(j));
  }
  return out;
}

}  // namespace dream

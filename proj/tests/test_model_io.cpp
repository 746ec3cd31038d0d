#include <catch_amalgamated.hpp>

#include <functional>

#include <json.hpp>

#include "dream/model_io.hpp"
#include "dream/rng.hpp"
#include "dream/util.hpp"

using namespace dream;
using nlohmann::json;

namespace {

AcordModel fixture_model() {
  const auto records = parse_semeval(read_file(std::string(DREAM_FIXTURE_DIR) + "/semeval_synthetic.txt"));
  TrainConfig cfg;
  cfg.rf_trees = 8;
  cfg.gb_stages = 6;
  cfg.lr_epochs = 40;
  cfg.per_class_k = 3;
  return train_acord(records, cfg);
}

// Rewrites one location of a saved model and returns the new bytes.
std::string mutate(const std::string& bytes, const std::function<void(json&)>& edit) {
  json j = json::parse(bytes);
  edit(j);
  return j.dump() + "\n";
}

TermVector random_vector(CounterRng& rng, std::size_t dim) {
  TermVector v;
  for (std::size_t f = 0; f < dim; ++f)
    if (rng.next_double() < 0.4) v.entries.emplace_back(f, static_cast<double>(1 + rng.next_index(3)));
  return v;
}

}  // namespace

TEST_CASE("save, load, save is byte-identical and prediction-identical") {
  const AcordModel model = fixture_model();
  const std::string first = save_model(model);
  const AcordModel loaded = load_model(first);
  const std::string second = save_model(loaded);
  CHECK(first == second);

  CHECK(loaded.format_version == model.format_version);
  CHECK(loaded.vocabulary.terms == model.vocabulary.terms);
  CHECK(loaded.vocabulary.term_to_index == model.vocabulary.term_to_index);
  CHECK(loaded.feature_space.selected == model.feature_space.selected);
  CHECK(loaded.feature_space.provenance == model.feature_space.provenance);

  CounterRng rng(2024, 0);
  for (int i = 0; i < 200; ++i) {
    const TermVector x = random_vector(rng, model.vocabulary.size());
    const auto a = predict_proba(model, x);
    const auto b = predict_proba(loaded, x);
    CHECK(a == b);  // bit-for-bit, not approximate
    CHECK(predict_ensemble(model, x).first == predict_ensemble(loaded, x).first);
  }
}

TEST_CASE("the model file ends with a newline and is one json document") {
  const std::string bytes = save_model(fixture_model());
  REQUIRE(!bytes.empty());
  CHECK(bytes.back() == '\n');
  CHECK(json::accept(bytes));
}

TEST_CASE("truncated or malformed bytes are rejected") {
  const std::string bytes = save_model(fixture_model());
  CHECK_THROWS_AS(load_model(bytes.substr(0, bytes.size() / 2)), Error);
  CHECK_THROWS_AS(load_model(""), Error);
  CHECK_THROWS_AS(load_model("not json at all"), Error);
  CHECK_THROWS_AS(load_model("[1, 2, 3]\n"), Error);
}

TEST_CASE("unsupported format versions are named in the error") {
  const std::string bytes = save_model(fixture_model());
  const std::string v2 = mutate(bytes, [](json& j) { j["format_version"] = 2; });
  try {
    load_model(v2);
    FAIL("expected a version error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("format_version 2") != std::string::npos);
    CHECK(what.find("supported: 1") != std::string::npos);
  }
}

TEST_CASE("missing sections and fields are rejected by name") {
  const std::string bytes = save_model(fixture_model());
  for (const char* key : {"config", "vocabulary", "feature_space", "logreg", "forest", "boost"}) {
    const std::string broken = mutate(bytes, [&](json& j) { j.erase(key); });
    try {
      load_model(broken);
      FAIL("expected a missing-field error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  }
  const std::string no_seed = mutate(bytes, [](json& j) { j["config"].erase("seed"); });
  CHECK_THROWS_AS(load_model(no_seed), Error);
}

TEST_CASE("structural invariants are checked on load") {
  const std::string bytes = save_model(fixture_model());

  const std::string dup_term =
      mutate(bytes, [](json& j) { j["vocabulary"]["terms"][1] = j["vocabulary"]["terms"][0]; });
  CHECK_THROWS_AS(load_model(dup_term), Error);

  const std::string df_mismatch =
      mutate(bytes, [](json& j) { j["vocabulary"]["document_frequency"].erase(0); });
  CHECK_THROWS_AS(load_model(df_mismatch), Error);

  const std::string bad_selected = mutate(bytes, [](json& j) {
    j["feature_space"]["selected"][0] = j["vocabulary"]["terms"].size();
  });
  CHECK_THROWS_AS(load_model(bad_selected), Error);

  const std::string bad_weights = mutate(bytes, [](json& j) { j["logreg"]["weights"][0].erase(0); });
  CHECK_THROWS_AS(load_model(bad_weights), Error);

  const std::string bad_child = mutate(bytes, [](json& j) {
    for (json& tree : j["forest"]["trees"]) {
      for (json& node : tree["nodes"]) {
        if (node.contains("f")) {
          node["l"] = 10000;
          return;
        }
      }
    }
    // ensure at least one interior node existed to corrupt
    throw std::runtime_error("fixture forest had no splits");
  });
  try {
    load_model(bad_child);
    FAIL("expected a child-index error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad child index") != std::string::npos);
  }

  const std::string seed_mismatch = mutate(bytes, [](json& j) { j["forest"]["tree_seeds"].erase(0); });
  CHECK_THROWS_AS(load_model(seed_mismatch), Error);

  const std::string stage_mismatch = mutate(bytes, [](json& j) { j["boost"]["stages"].erase(0); });
  CHECK_THROWS_AS(load_model(stage_mismatch), Error);
}

TEST_CASE("train config serialization round trips non-default values") {
  TrainConfig c;
  c.seed = 99;
  c.lr_learning_rate = 0.05;
  c.lr_l2 = 0.5;
  c.lr_epochs = 7;
  c.rf_trees = 3;
  c.rf_max_depth = 2;
  c.rf_feature_fraction = 0.75;
  c.gb_stages = 4;
  c.gb_learning_rate = 0.2;
  c.gb_max_depth = 5;
  c.per_class_k = 11;
  c.min_df = 3;
  c.anova_mode = AnovaMode::kMulticlass;
  c.anova_epsilon = 1e-6;
  c.context_width = 2;

  const TrainConfig back = config_from_json(config_to_json(c));
  CHECK(back.seed == c.seed);
  CHECK(back.lr_learning_rate == c.lr_learning_rate);
  CHECK(back.lr_l2 == c.lr_l2);
  CHECK(back.lr_epochs == c.lr_epochs);
  CHECK(back.rf_trees == c.rf_trees);
  CHECK(back.rf_max_depth == c.rf_max_depth);
  CHECK(back.rf_feature_fraction == c.rf_feature_fraction);
  CHECK(back.gb_stages == c.gb_stages);
  CHECK(back.gb_learning_rate == c.gb_learning_rate);
  CHECK(back.gb_max_depth == c.gb_max_depth);
  CHECK(back.per_class_k == c.per_class_k);
  CHECK(back.min_df == c.min_df);
  CHECK(back.anova_mode == c.anova_mode);
  CHECK(back.anova_epsilon == c.anova_epsilon);
  CHECK(back.context_width == c.context_width);
  CHECK(back.voting == "soft");
}

TEST_CASE("loaded trees keep interior structure") {
  const AcordModel model = fixture_model();
  const AcordModel loaded = load_model(save_model(model));
  REQUIRE(loaded.forest.trees.size() == model.forest.trees.size());
  std::size_t interior = 0;
  for (std::size_t t = 0; t < model.forest.trees.size(); ++t) {
    const auto& a = model.forest.trees[t].nodes;
    const auto& b = loaded.forest.trees[t].nodes;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].feature == b[i].feature);
      CHECK(a[i].threshold == b[i].threshold);
      CHECK(a[i].left == b[i].left);
      CHECK(a[i].right == b[i].right);
      CHECK(a[i].value == b[i].value);
      if (a[i].feature >= 0) ++interior;
    }
  }
  CHECK(interior > 0);  // the fixture really exercises split serialization
}

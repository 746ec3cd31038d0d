#include <catch_amalgamated.hpp>

#include <array>

#include "dream/ensemble.hpp"
#include "dream/model_io.hpp"
#include "dream/util.hpp"

using namespace dream;

namespace {

SemevalRecord record(int id, const std::string& sentence, CharSpan e1, CharSpan e2, RelationLabel label) {
  SemevalRecord r;
  r.id = id;
  r.sentence_text = sentence;
  r.e1_span = e1;
  r.e2_span = e2;
  r.raw_label = to_string(label);
  r.folded_label = label;
  return r;
}

// A model whose three members ignore the input: logistic regression and
// boosting produce softmax(bias), the forest a single constant leaf.
AcordModel constant_model(std::array<double, 3> lr_bias, std::vector<double> forest_leaf,
                          std::array<double, 3> boost_init) {
  AcordModel m;
  m.vocabulary = build_vocabulary({{"alpha"}, {"alpha"}, {"beta"}, {"beta"}}, 2);
  m.feature_space.selected = {0};  // keep "alpha", drop "beta"
  m.feature_space.per_class_k = 1;
  m.feature_space.mode = AnovaMode::kOneVsRest;
  m.feature_space.provenance = "hand-built";
  m.logreg.num_classes = kNumClasses;
  m.logreg.num_features = 1;
  m.logreg.weights.assign(kNumClasses, {0.0});
  m.logreg.bias.assign(lr_bias.begin(), lr_bias.end());
  TreeNode leaf;
  leaf.value = std::move(forest_leaf);
  DecisionTree tree;
  tree.nodes = {leaf};
  m.forest.num_classes = kNumClasses;
  m.forest.trees = {tree};
  m.forest.tree_seeds = {0};
  m.boost.num_classes = kNumClasses;
  m.boost.learning_rate = 0.1;
  m.boost.initial_scores.assign(boost_init.begin(), boost_init.end());
  m.boost.stages.assign(kNumClasses, {});
  return m;
}

std::vector<SemevalRecord> fixture_records() {
  return parse_semeval(read_file(std::string(DREAM_FIXTURE_DIR) + "/semeval_synthetic.txt"));
}

}  // namespace

TEST_CASE("training window takes the tokens strictly between the entities") {
  const SemevalRecord r =
      record(1, "Alpha triggers severe beta damage.", {0, 5}, {22, 26}, RelationLabel::kCauseEffect);
  CHECK(training_window(r) == std::vector<std::string>{"triggers", "severe"});
  CHECK(training_window(r, 1) == std::vector<std::string>{"alpha", "triggers", "severe", "beta"});
  CHECK(training_window(r, 100).size() == 5);  // context clamps to the sentence
}

TEST_CASE("adjacent entities produce an empty window") {
  const SemevalRecord r = record(2, "Alpha beta", {0, 5}, {6, 10}, RelationLabel::kOther);
  CHECK(training_window(r).empty());
}

TEST_CASE("a reversed span ordering clamps to an empty window") {
  const SemevalRecord r = record(3, "alpha beta", {6, 10}, {0, 5}, RelationLabel::kOther);
  CHECK(training_window(r).empty());
}

TEST_CASE("boundary tokens are excluded exactly") {
  const SemevalRecord r = record(4, "A B C", {0, 1}, {4, 5}, RelationLabel::kOther);
  CHECK(training_window(r) == std::vector<std::string>{"b"});
}

TEST_CASE("train config rejects out-of-range values") {
  TrainConfig c;
  c.lr_epochs = 0;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = TrainConfig{};
  c.rf_feature_fraction = 1.5;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = TrainConfig{};
  c.voting = "hard";
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = TrainConfig{};
  c.anova_epsilon = 0.0;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = TrainConfig{};
  c.lr_l2 = -0.1;
  CHECK_THROWS_AS(c.check(), ConfigError);
  CHECK_NOTHROW(TrainConfig{}.check());
}

TEST_CASE("ensemble probabilities are the mean of the three members") {
  // softmax(0,0,0) twice plus a (1,0,0) forest leaf
  const AcordModel m = constant_model({0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  const auto p = predict_proba(m, vectorize({"alpha"}, m.vocabulary));
  CHECK(p[0] == Catch::Approx(5.0 / 9.0));
  CHECK(p[1] == Catch::Approx(2.0 / 9.0));
  CHECK(p[2] == Catch::Approx(2.0 / 9.0));
}

TEST_CASE("an exact probability tie picks the earlier class") {
  // All members rank cause-effect and component-whole identically, so the
  // averaged probabilities tie bit for bit.
  const AcordModel m = constant_model({0.0, 0.0, -50.0}, {0.5, 0.5, 0.0}, {0.0, 0.0, -50.0});
  const auto [label, p] = predict_ensemble(m, TermVector{});
  CHECK(p[0] == p[1]);
  CHECK(p[0] > p[2]);
  CHECK(label == RelationLabel::kCauseEffect);

  const AcordModel cw = constant_model({-50.0, 0.0, -50.0}, {0.0, 1.0, 0.0}, {-50.0, 0.0, -50.0});
  CHECK(predict_ensemble(cw, TermVector{}).first == RelationLabel::kComponentWhole);
}

TEST_CASE("unselected and unknown terms project away") {
  const AcordModel m = constant_model({0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  const auto base = predict_proba(m, TermVector{});
  const auto beta_only = predict_proba(m, vectorize({"beta", "beta"}, m.vocabulary));
  const auto unknown = predict_proba(m, vectorize({"gamma"}, m.vocabulary));
  CHECK(base == beta_only);
  CHECK(base == unknown);
}

TEST_CASE("classify_window reports its probabilities") {
  const AcordModel m = constant_model({0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 0.0});
  std::array<double, 3> probs{};
  const RelationLabel label = classify_window(m, {"anything"}, &probs);
  CHECK(label == RelationLabel::kOther);
  CHECK(probs[0] + probs[1] + probs[2] == Catch::Approx(1.0));
  CHECK(probs[2] > probs[0]);
}

TEST_CASE("evaluate counts a degenerate always-other model correctly") {
  const AcordModel m = constant_model({-50.0, -50.0, 50.0}, {0.0, 0.0, 1.0}, {-50.0, -50.0, 50.0});
  std::vector<SemevalRecord> records;
  for (int i = 0; i < 2; ++i)
    records.push_back(record(i, "a causes b", {0, 1}, {9, 10}, RelationLabel::kCauseEffect));
  for (int i = 2; i < 6; ++i) records.push_back(record(i, "a and b", {0, 1}, {6, 7}, RelationLabel::kOther));

  const EvalMetrics metrics = evaluate(m, records);
  const auto o = static_cast<std::size_t>(RelationLabel::kOther);
  const auto ce = static_cast<std::size_t>(RelationLabel::kCauseEffect);
  CHECK(metrics.confusion[ce][o] == 2);
  CHECK(metrics.confusion[o][o] == 4);
  CHECK(metrics.accuracy == Catch::Approx(4.0 / 6.0));
  CHECK(metrics.precision[o] == Catch::Approx(4.0 / 6.0));
  CHECK(metrics.recall[o] == 1.0);
  CHECK(metrics.f1[o] == Catch::Approx(0.8));
  CHECK(metrics.precision[ce] == 0.0);  // no predictions for the class
  CHECK(metrics.recall[ce] == 0.0);
  CHECK(metrics.f1[ce] == 0.0);
  CHECK(metrics.macro_f1 == Catch::Approx(0.8 / 3.0));
}

TEST_CASE("evaluate refuses an empty record set") {
  const AcordModel m = constant_model({0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  CHECK_THROWS_AS(evaluate(m, {}), Error);
}

TEST_CASE("training requires every class to be present") {
  std::vector<SemevalRecord> ce_only;
  for (const SemevalRecord& r : fixture_records())
    if (r.folded_label == RelationLabel::kCauseEffect) ce_only.push_back(r);
  REQUIRE(ce_only.size() == 10);
  try {
    train_acord(ce_only, TrainConfig{});
    FAIL("expected a missing-class error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("component-whole") != std::string::npos);
    CHECK(std::string(e.what()).find("no training examples") != std::string::npos);
  }
  CHECK_THROWS_AS(train_acord({}, TrainConfig{}), Error);
}

TEST_CASE("the synthetic corpus is learned perfectly") {
  const std::vector<SemevalRecord> records = fixture_records();
  std::vector<std::string> warnings;
  const AcordModel model = train_acord(records, TrainConfig{}, &warnings);
  // default per-class budget exceeds the small vocabulary
  REQUIRE(!warnings.empty());
  CHECK(warnings[0].find("selecting all") != std::string::npos);

  const EvalMetrics metrics = evaluate(model, records);
  CHECK(metrics.accuracy == 1.0);
  CHECK(metrics.macro_f1 == Catch::Approx(1.0));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    CHECK(metrics.precision[c] == 1.0);
    CHECK(metrics.recall[c] == 1.0);
  }
}

TEST_CASE("training is reproducible and seed-sensitive") {
  const std::vector<SemevalRecord> records = fixture_records();
  TrainConfig fast;
  fast.rf_trees = 10;
  fast.gb_stages = 10;
  fast.lr_epochs = 50;
  const std::string a = save_model(train_acord(records, fast));
  const std::string b = save_model(train_acord(records, fast));
  CHECK(a == b);

  TrainConfig other = fast;
  other.seed = 43;
  const std::string c = save_model(train_acord(records, other));
  CHECK(a != c);
}

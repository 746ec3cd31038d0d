#pragma once

#include <array>
#include <string>
#include <vector>

#include "dream/corpus.hpp"
#include "dream/errors.hpp"
#include "dream/features.hpp"
#include "dream/forest.hpp"
#include "dream/gboost.hpp"
#include "dream/logreg.hpp"

namespace dream {

struct TrainConfig {
  std::uint64_t seed = 42;
  double lr_learning_rate = 0.1;
  double lr_l2 = 1e-4;
  std::size_t lr_epochs = 300;
  std::size_t rf_trees = 100;
  std::size_t rf_max_depth = 16;
  double rf_feature_fraction = 0.3;
  std::size_t gb_stages = 100;
  double gb_learning_rate = 0.1;
  std::size_t gb_max_depth = 3;
  std::string voting = "soft";
  std::size_t per_class_k = 500;
  std::size_t min_df = 2;
  AnovaMode anova_mode = AnovaMode::kOneVsRest;
  double anova_epsilon = kDefaultAnovaEpsilon;
  std::size_t context_width = 0;  // extra tokens kept on each side of the window

  void check() const {
    if (lr_epochs < 1 || rf_trees < 1 || rf_max_depth < 1 || gb_stages < 1 || gb_max_depth < 1 || per_class_k < 1 ||
        min_df < 1)
      throw ConfigError("training counts must be >= 1");
    if (lr_learning_rate <= 0.0 || gb_learning_rate <= 0.0) throw ConfigError("learning rates must be > 0");
    if (lr_l2 < 0.0) throw ConfigError("lr_l2 must be >= 0");
    if (rf_feature_fraction <= 0.0 || rf_feature_fraction > 1.0)
      throw ConfigError("rf_feature_fraction must be in (0, 1]");
    if (anova_epsilon <= 0.0) throw ConfigError("anova_epsilon must be > 0");
    if (voting != "soft") throw ConfigError("voting must be 'soft'");
  }
};

struct AcordModel {
  int format_version = 1;
  TrainConfig config;
  Vocabulary vocabulary;
  FeatureSpace feature_space;
  LogRegModel logreg;
  ForestModel forest;
  BoostModel boost;
  // class order is fixed: cause-effect, component-whole, other
};

// The classifier input for a SemEval record: tokens strictly between the two
// entity spans, optionally widened by context_width tokens on each side.
inline std::vector<std::string> training_window(const SemevalRecord& record, std::size_t context_width = 0) {
  const std::vector<Token> tokens = tokenize(record.sentence_text);
  std::size_t begin = tokens.size();
  std::size_t end = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].char_start >= record.e1_span.end && begin == tokens.size()) begin = i;
    if (tokens[i].char_end <= record.e2_span.begin) end = i + 1;
  }
  if (begin > end) begin = end;
  const std::size_t lo = begin >= context_width ? begin - context_width : 0;
  const std::size_t hi = std::min(end + context_width, tokens.size());
  std::vector<std::string> out;
  out.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) out.push_back(tokens[i].text);
  return out;
}

inline std::vector<double> predict_proba(const AcordModel& model, const TermVector& x_vocab_space) {
  const TermVector x = project(x_vocab_space, model.feature_space);
  const std::vector<double> a = predict_proba(model.logreg, x);
  const std::vector<double> b = predict_proba(model.forest, x);
  const std::vector<double> c = predict_proba(model.boost, x);
  std::vector<double> mean(kNumClasses);
  for (std::size_t i = 0; i < kNumClasses; ++i) mean[i] = (a[i] + b[i] + c[i]) / 3.0;
  return mean;
}

// Soft vote; exact ties pick the earlier class in the fixed order
// cause-effect < component-whole < other.
inline std::pair<RelationLabel, std::array<double, 3>> predict_ensemble(const AcordModel& model,
                                                                        const TermVector& x_vocab_space) {
  const std::vector<double> p = predict_proba(model, x_vocab_space);
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (p[c] > p[best]) best = c;
  return {static_cast<RelationLabel>(best), {p[0], p[1], p[2]}};
}

inline AcordModel train_acord(const std::vector<SemevalRecord>& records, const TrainConfig& config,
                              std::vector<std::string>* warnings = nullptr) {
  config.check();
  if (records.empty()) throw Error("train_acord: no training records");
  std::vector<std::vector<std::string>> windows;
  std::vector<std::size_t> labels;
  windows.reserve(records.size());
  labels.reserve(records.size());
  std::array<std::size_t, kNumClasses> class_counts{};
  for (const SemevalRecord& r : records) {
    windows.push_back(training_window(r, config.context_width));
    labels.push_back(static_cast<std::size_t>(r.folded_label));
    ++class_counts[labels.back()];
  }
  for (std::size_t c = 0; c < kNumClasses; ++c)
    if (class_counts[c] == 0)
      throw Error(std::string("train_acord: class '") + to_string(static_cast<RelationLabel>(c)) +
                  "' has no training examples");

  AcordModel model;
  model.config = config;
  model.vocabulary = build_vocabulary(windows, config.min_df);
  std::vector<TermVector> vocab_vectors;
  vocab_vectors.reserve(windows.size());
  for (const auto& w : windows) vocab_vectors.push_back(vectorize(w, model.vocabulary));
  const AnovaTable table =
      build_anova_table(vocab_vectors, labels, kNumClasses, model.vocabulary, config.anova_epsilon);
  model.feature_space = select_features(table, config.per_class_k, config.anova_mode, warnings);

  std::vector<TermVector> X;
  X.reserve(vocab_vectors.size());
  for (const auto& v : vocab_vectors) X.push_back(project(v, model.feature_space));
  const std::size_t d = model.feature_space.dimension();

  LogRegConfig lr{config.lr_learning_rate, config.lr_l2, config.lr_epochs};
  model.logreg = train_logreg(X, labels, kNumClasses, d, lr);
  ForestConfig rf{config.rf_trees, config.rf_max_depth, config.rf_feature_fraction, config.seed};
  model.forest = train_forest(X, labels, kNumClasses, d, rf);
  BoostConfig gb{config.gb_stages, config.gb_learning_rate, config.gb_max_depth};
  model.boost = train_boost(X, labels, kNumClasses, d, gb);
  return model;
}

inline RelationLabel classify_window(const AcordModel& model, const std::vector<std::string>& window_tokens,
                                     std::array<double, 3>* probs = nullptr) {
  const auto [label, p] = predict_ensemble(model, vectorize(window_tokens, model.vocabulary));
  if (probs) *probs = p;
  return label;
}

struct EvalMetrics {
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};  // [gold][predicted]
};

inline EvalMetrics evaluate(const AcordModel& model, const std::vector<SemevalRecord>& records) {
  if (records.empty()) throw Error("evaluate: no records");
  EvalMetrics m;
  for (const SemevalRecord& r : records) {
    const RelationLabel pred = classify_window(model, training_window(r, model.config.context_width));
    ++m.confusion[static_cast<std::size_t>(r.folded_label)][static_cast<std::size_t>(pred)];
  }
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) correct += m.confusion[c][c];
  m.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t pred_c = 0, gold_c = 0;
    for (std::size_t g = 0; g < kNumClasses; ++g) {
      pred_c += m.confusion[g][c];
      gold_c += m.confusion[c][g];
    }
    m.precision[c] = pred_c ? static_cast<double>(m.confusion[c][c]) / static_cast<double>(pred_c) : 0.0;
    m.recall[c] = gold_c ? static_cast<double>(m.confusion[c][c]) / static_cast<double>(gold_c) : 0.0;
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
    m.macro_f1 += m.f1[c] / static_cast<double>(kNumClasses);
  }
  return m;
}

}  // namespace dream

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dream/errors.hpp"
#include "dream/util.hpp"

namespace dream {

inline constexpr double kDefaultAnovaEpsilon = 1e-9;

struct Vocabulary {
  std::vector<std::string> terms;  // index -> term, lexicographically sorted
  std::map<std::string, std::size_t> term_to_index;
  std::vector<std::size_t> document_frequency;  // by term index

  std::size_t size() const { return terms.size(); }
};

// Terms kept iff they occur in at least min_df distinct examples; indices
// assigned in lexicographic term order.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& examples, std::size_t min_df) {
  if (examples.empty()) throw Error("build_vocabulary: no examples");
  if (min_df < 1) throw ConfigError("min_df must be >= 1");
  std::map<std::string, std::size_t> df;
  for (const auto& tokens : examples) {
    const std::set<std::string_view> uniq(tokens.begin(), tokens.end());
    for (const std::string_view t : uniq) ++df[std::string(t)];
  }
  Vocabulary vocab;
  for (const auto& [term, count] : df) {
    if (count < min_df) continue;
    vocab.term_to_index.emplace(term, vocab.terms.size());
    vocab.terms.push_back(term);
    vocab.document_frequency.push_back(count);
  }
  return vocab;
}

// Sparse non-negative feature vector: (index, value) with strictly
// increasing indices and no explicit zeros.
struct TermVector {
  std::vector<std::pair<std::size_t, double>> entries;

  bool empty() const { return entries.empty(); }
  double value_at(std::size_t index) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                     [](const auto& e, std::size_t i) { return e.first < i; });
    return (it != entries.end() && it->first == index) ? it->second : 0.0;
  }
};

inline TermVector vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::map<std::size_t, double> counts;
  for (const std::string& t : tokens) {
    const auto it = vocab.term_to_index.find(t);
    if (it != vocab.term_to_index.end()) counts[it->second] += 1.0;
  }
  TermVector v;
  v.entries.assign(counts.begin(), counts.end());
  return v;
}

namespace detail {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

inline MeanVar population_stats(const std::vector<double>& xs) {
  MeanVar mv;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) mv.mean += x;
  mv.mean /= n;
  for (double x : xs) mv.variance += (x - mv.mean) * (x - mv.mean);
  mv.variance = std::max(mv.variance / n, 0.0);
  return mv;
}

inline double anova_from_stats(const std::vector<MeanVar>& groups, double epsilon) {
  const double c = static_cast<double>(groups.size());
  double mean_of_means = 0.0;
  double mean_of_vars = 0.0;
  for (const MeanVar& g : groups) {
    mean_of_means += g.mean;
    mean_of_vars += g.variance;
  }
  mean_of_means /= c;
  mean_of_vars /= c;
  double var_of_means = 0.0;
  for (const MeanVar& g : groups) var_of_means += (g.mean - mean_of_means) * (g.mean - mean_of_means);
  var_of_means /= c;
  return var_of_means / std::max(mean_of_vars, epsilon);
}

}  // namespace detail

// Ratio of the variance of per-class means to the mean of per-class
// population variances, with an epsilon floor on the denominator.
inline double anova_score(const std::vector<std::vector<double>>& per_class_counts,
                          double epsilon = kDefaultAnovaEpsilon) {
  if (per_class_counts.size() < 2) throw Error("anova_score: need at least 2 classes");
  if (epsilon <= 0.0) throw ConfigError("anova_score: epsilon must be positive");
  std::vector<detail::MeanVar> groups;
  groups.reserve(per_class_counts.size());
  for (const auto& counts : per_class_counts) {
    if (counts.empty()) throw Error("anova_score: empty class");
    groups.push_back(detail::population_stats(counts));
  }
  return detail::anova_from_stats(groups, epsilon);
}

// Per-term, per-class count statistics over a labeled example set.
struct AnovaTable {
  std::size_t num_classes = 0;
  double epsilon = kDefaultAnovaEpsilon;
  std::vector<std::size_t> class_example_counts;  // per class
  std::vector<std::string> terms;                 // by vocabulary index
  std::vector<std::vector<double>> means;         // [term][class]
  std::vector<std::vector<double>> variances;     // [term][class], population
  std::vector<double> multiclass_score;           // [term]
  std::string snapshot_id;                        // content hash of the rows above
};

inline AnovaTable build_anova_table(const std::vector<TermVector>& vectors, const std::vector<std::size_t>& labels,
                                    std::size_t num_classes, const Vocabulary& vocab,
                                    double epsilon = kDefaultAnovaEpsilon) {
  if (vectors.size() != labels.size()) throw Error("build_anova_table: vectors/labels size mismatch");
  if (num_classes < 2) throw Error("build_anova_table: need at least 2 classes");
  AnovaTable table;
  table.num_classes = num_classes;
  table.epsilon = epsilon;
  table.class_example_counts.assign(num_classes, 0);
  for (std::size_t y : labels) {
    if (y >= num_classes) throw Error("build_anova_table: label out of range");
    ++table.class_example_counts[y];
  }
  for (std::size_t c = 0; c < num_classes; ++c)
    if (table.class_example_counts[c] == 0)
      throw Error("build_anova_table: class " + std::to_string(c) + " has no examples");

  const std::size_t d = vocab.size();
  table.terms = vocab.terms;
  std::vector<std::vector<double>> sum(d, std::vector<double>(num_classes, 0.0));
  std::vector<std::vector<double>> sumsq(d, std::vector<double>(num_classes, 0.0));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const std::size_t y = labels[i];
    for (const auto& [idx, value] : vectors[i].entries) {
      if (idx >= d) throw Error("build_anova_table: vector index out of vocabulary range");
      sum[idx][y] += value;
      sumsq[idx][y] += value * value;
    }
  }
  table.means.assign(d, std::vector<double>(num_classes, 0.0));
  table.variances.assign(d, std::vector<double>(num_classes, 0.0));
  table.multiclass_score.assign(d, 0.0);
  for (std::size_t t = 0; t < d; ++t) {
    std::vector<detail::MeanVar> groups(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double n = static_cast<double>(table.class_example_counts[c]);
      const double mean = sum[t][c] / n;
      const double variance = std::max(sumsq[t][c] / n - mean * mean, 0.0);
      table.means[t][c] = mean;
      table.variances[t][c] = variance;
      groups[c] = {mean, variance};
    }
    table.multiclass_score[t] = detail::anova_from_stats(groups, epsilon);
  }

  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix_bytes = [&h](const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 0x100000001b3ULL;
  };
  for (std::size_t t = 0; t < d; ++t) {
    mix_bytes(table.terms[t].data(), table.terms[t].size());
    mix_bytes(table.means[t].data(), num_classes * sizeof(double));
    mix_bytes(table.variances[t].data(), num_classes * sizeof(double));
  }
  mix_bytes(table.class_example_counts.data(), num_classes * sizeof(std::size_t));
  table.snapshot_id = to_hex(h);
  return table;
}

// One-vs-rest statistics for class c are recovered exactly from the stored
// per-class moments: the rest group's mean and E[x^2] are count-weighted
// averages of the other classes'.
namespace detail {

inline double one_vs_rest_score(const AnovaTable& table, std::size_t term, std::size_t cls) {
  std::size_t rest_count = 0;
  double rest_sum = 0.0;
  double rest_sumsq = 0.0;
  for (std::size_t c = 0; c < table.num_classes; ++c) {
    if (c == cls) continue;
    const double n = static_cast<double>(table.class_example_counts[c]);
    const double mean = table.means[term][c];
    rest_count += table.class_example_counts[c];
    rest_sum += n * mean;
    rest_sumsq += n * (table.variances[term][c] + mean * mean);
  }
  const double rn = static_cast<double>(rest_count);
  MeanVar rest;
  rest.mean = rest_sum / rn;
  rest.variance = std::max(rest_sumsq / rn - rest.mean * rest.mean, 0.0);
  const MeanVar own{table.means[term][cls], table.variances[term][cls]};
  return anova_from_stats({own, rest}, table.epsilon);
}

}  // namespace detail

enum class AnovaMode { kOneVsRest, kMulticlass };

inline const char* to_string(AnovaMode mode) {
  return mode == AnovaMode::kOneVsRest ? "one_vs_rest" : "multiclass";
}

inline AnovaMode anova_mode_from_string(std::string_view s) {
  if (s == "one_vs_rest") return AnovaMode::kOneVsRest;
  if (s == "multiclass") return AnovaMode::kMulticlass;
  throw ConfigError("unknown anova mode: '" + std::string(s) + "'");
}

struct FeatureSpace {
  std::vector<std::size_t> selected;  // ascending vocabulary indices
  std::size_t per_class_k = 0;
  AnovaMode mode = AnovaMode::kOneVsRest;
  std::string provenance;  // AnovaTable snapshot id

  std::size_t dimension() const { return selected.size(); }
};

// Top per_class_k terms per class (one-vs-rest) unioned, or the top
// per_class_k * C terms of the multiclass score. Ties prefer the
// lexicographically smaller term.
inline FeatureSpace select_features(const AnovaTable& table, std::size_t per_class_k, AnovaMode mode,
                                    std::vector<std::string>* warnings = nullptr) {
  if (per_class_k < 1) throw ConfigError("per_class_k must be >= 1");
  const std::size_t d = table.terms.size();
  if (d == 0) throw Error("select_features: empty vocabulary");

  const auto rank = [&table](std::vector<std::size_t>& order, const std::vector<double>& score) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (score[a] != score[b]) return score[a] > score[b];
      return table.terms[a] < table.terms[b];
    });
  };

  std::vector<bool> chosen(d, false);
  if (mode == AnovaMode::kOneVsRest) {
    if (per_class_k > d && warnings)
      warnings->push_back("requested " + std::to_string(per_class_k) + " features per class but vocabulary has only " +
                          std::to_string(d) + " terms; selecting all");
    for (std::size_t c = 0; c < table.num_classes; ++c) {
      std::vector<double> score(d);
      for (std::size_t t = 0; t < d; ++t) score[t] = detail::one_vs_rest_score(table, t, c);
      std::vector<std::size_t> order(d);
      for (std::size_t t = 0; t < d; ++t) order[t] = t;
      rank(order, score);
      for (std::size_t r = 0; r < std::min(per_class_k, d); ++r) chosen[order[r]] = true;
    }
  } else {
    const std::size_t want = per_class_k * table.num_classes;
    if (want > d && warnings)
      warnings->push_back("requested " + std::to_string(want) + " features but vocabulary has only " +
                          std::to_string(d) + " terms; selecting all");
    std::vector<std::size_t> order(d);
    for (std::size_t t = 0; t < d; ++t) order[t] = t;
    rank(order, table.multiclass_score);
    for (std::size_t r = 0; r < std::min(want, d); ++r) chosen[order[r]] = true;
  }

  FeatureSpace space;
  space.per_class_k = per_class_k;
  space.mode = mode;
  space.provenance = table.snapshot_id;
  for (std::size_t t = 0; t < d; ++t)
    if (chosen[t]) space.selected.push_back(t);
  return space;
}

// Keeps selected indices only, densely re-indexed by ascending original index.
inline TermVector project(const TermVector& vector, const FeatureSpace& space) {
  TermVector out;
  std::size_t s = 0;
  for (const auto& [idx, value] : vector.entries) {
    while (s < space.selected.size() && space.selected[s] < idx) ++s;
    if (s == space.selected.size()) break;
    if (space.selected[s] == idx) out.entries.emplace_back(s, value);
  }
  return out;
}

}  // namespace dream

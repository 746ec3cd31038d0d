#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dream/errors.hpp"
#include "dream/extraction.hpp"
#include "dream/oracle.hpp"
#include "dream/prompt.hpp"

namespace dream {

enum class Agreement { kAgree, kDisagree, kIndeterminate };

inline const char* to_string(Agreement a) {
  switch (a) {
    case Agreement::kAgree: return "agree";
    case Agreement::kDisagree: return "disagree";
    case Agreement::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

inline Agreement agreement_from_string(std::string_view s) {
  if (s == "agree") return Agreement::kAgree;
  if (s == "disagree") return Agreement::kDisagree;
  if (s == "indeterminate") return Agreement::kIndeterminate;
  throw ParseError("unknown agreement: '" + std::string(s) + "'");
}

struct Verdict {
  std::string pair_id;
  LlmLabel llm_label = LlmLabel::kIndeterminate;
  Agreement agreement = Agreement::kIndeterminate;
  std::string raw_response;
  std::string error;  // oracle failure for this triple, if any
};

struct GraphCounts {
  std::size_t entities = 0;
  std::size_t relations = 0;  // unique edges
  std::size_t triples = 0;
};

inline GraphCounts graph_counts(const std::vector<RelationTriple>& triples) {
  const RelationGraph g = build_graph(triples);
  return {g.nodes.size(), g.edges.size(), triples.size()};
}

struct ValidationReport {
  std::vector<Verdict> verdicts;            // input triple order
  std::vector<std::size_t> retained;        // triple indices with Agree
  std::vector<std::size_t> removed;         // Disagree
  std::vector<std::size_t> indeterminate;   // kept in the output but unvalidated
  // rows: classifier label, cols: LLM label, determinate verdicts only;
  // index 0 = cause-effect, 1 = component-whole
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::optional<double> agreement_rate;     // |Agree| / determinate
  std::optional<double> precision_cause_effect;
  std::optional<double> precision_component_whole;
  std::optional<double> precision_macro;
  std::optional<double> precision_micro;
  std::optional<double> precision_weighted;
  GraphCounts before;
  GraphCounts after;  // over retained + indeterminate (the survivor set)
};

namespace detail {

inline Verdict judge_triple(const RelationTriple& t, OracleClient& client, const PromptTemplate& tpl) {
  Verdict v;
  v.pair_id = t.pair_id;
  try {
    const RenderedPrompt p =
        render_prompt(tpl, t.provenance.sentence_text, t.provenance.subject_surface, t.provenance.object_surface);
    v.raw_response = client.query(p.system_text, p.user_text, t.pair_id);
    v.llm_label = parse_label(v.raw_response);
  } catch (const std::exception& e) {
    v.llm_label = LlmLabel::kIndeterminate;
    v.agreement = Agreement::kIndeterminate;
    v.error = e.what();
    return v;
  }
  if (v.llm_label == LlmLabel::kIndeterminate) {
    v.agreement = Agreement::kIndeterminate;
  } else {
    const bool match = (v.llm_label == LlmLabel::kCauseEffect && t.label == RelationLabel::kCauseEffect) ||
                       (v.llm_label == LlmLabel::kComponentWhole && t.label == RelationLabel::kComponentWhole);
    v.agreement = match ? Agreement::kAgree : Agreement::kDisagree;
  }
  return v;
}

}  // namespace detail

// Builds the report from already-collected verdicts (input triple order).
inline ValidationReport assemble_report(const std::vector<RelationTriple>& triples, std::vector<Verdict> verdicts) {
  if (verdicts.size() != triples.size()) throw Error("assemble_report: verdicts do not cover the triples");
  for (std::size_t i = 0; i < triples.size(); ++i)
    if (verdicts[i].pair_id != triples[i].pair_id)
      throw Error("assemble_report: verdict order mismatch at '" + triples[i].pair_id + "'");
  ValidationReport report;
  report.verdicts = std::move(verdicts);

  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Verdict& v = report.verdicts[i];
    switch (v.agreement) {
      case Agreement::kAgree: report.retained.push_back(i); break;
      case Agreement::kDisagree: report.removed.push_back(i); break;
      case Agreement::kIndeterminate: report.indeterminate.push_back(i); break;
    }
    if (v.agreement == Agreement::kIndeterminate) continue;
    const std::size_t row = triples[i].label == RelationLabel::kCauseEffect ? 0 : 1;
    const std::size_t col = v.llm_label == LlmLabel::kCauseEffect ? 0 : 1;
    ++report.confusion[row][col];
  }

  const std::size_t agree = report.confusion[0][0] + report.confusion[1][1];
  const std::size_t determinate = agree + report.confusion[0][1] + report.confusion[1][0];
  if (determinate > 0) {
    report.agreement_rate = static_cast<double>(agree) / static_cast<double>(determinate);
    report.precision_micro = report.agreement_rate;
    const std::size_t ce_row = report.confusion[0][0] + report.confusion[0][1];
    const std::size_t cw_row = report.confusion[1][0] + report.confusion[1][1];
    if (ce_row > 0)
      report.precision_cause_effect = static_cast<double>(report.confusion[0][0]) / static_cast<double>(ce_row);
    if (cw_row > 0)
      report.precision_component_whole = static_cast<double>(report.confusion[1][1]) / static_cast<double>(cw_row);
    double macro = 0.0, weighted = 0.0;
    std::size_t defined = 0;
    if (report.precision_cause_effect) {
      macro += *report.precision_cause_effect;
      weighted += static_cast<double>(ce_row) * *report.precision_cause_effect;
      ++defined;
    }
    if (report.precision_component_whole) {
      macro += *report.precision_component_whole;
      weighted += static_cast<double>(cw_row) * *report.precision_component_whole;
      ++defined;
    }
    if (defined > 0) {
      report.precision_macro = macro / static_cast<double>(defined);
      report.precision_weighted = weighted / static_cast<double>(determinate);
    }
  }

  report.before = graph_counts(triples);
  std::vector<RelationTriple> survivors;
  survivors.reserve(report.retained.size() + report.indeterminate.size());
  for (std::size_t i = 0; i < triples.size(); ++i)
    if (report.verdicts[i].agreement != Agreement::kDisagree) survivors.push_back(triples[i]);
  report.after = graph_counts(survivors);
  return report;
}

// One verdict per triple; Agree retains, Disagree removes, Indeterminate is
// retained-but-flagged and excluded from the confusion matrix and rate.
inline ValidationReport validate(const std::vector<RelationTriple>& triples, OracleClient& client,
                                 const PromptTemplate& tpl) {
  std::vector<Verdict> verdicts(triples.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(client.config().concurrency, triples.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < triples.size(); ++i) verdicts[i] = detail::judge_triple(triples[i], client, tpl);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= triples.size()) return;
          verdicts[i] = detail::judge_triple(triples[i], client, tpl);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  std::size_t failed = 0;
  for (const Verdict& v : verdicts)
    if (!v.error.empty()) ++failed;
  if (!triples.empty() && failed == triples.size())
    throw Error("validate: every oracle query failed (first: " + verdicts[0].error + ")");
  return assemble_report(triples, std::move(verdicts));
}

inline nlohmann::json verdict_to_json(const Verdict& v) {
  return nlohmann::json{
      {"agreement", to_string(v.agreement)}, {"error", v.error},           {"llm_label", to_string(v.llm_label)},
      {"pair_id", v.pair_id},                {"raw_response", v.raw_response},
  };
}

inline Verdict verdict_from_json(const nlohmann::json& j, const char* where = "verdict") {
  Verdict v;
  try {
    v.pair_id = j.at("pair_id").get<std::string>();
    v.agreement = agreement_from_string(j.at("agreement").get<std::string>());
    const std::string label = j.at("llm_label").get<std::string>();
    v.llm_label = label == "cause-effect"      ? LlmLabel::kCauseEffect
                  : label == "component-whole" ? LlmLabel::kComponentWhole
                                               : LlmLabel::kIndeterminate;
    v.raw_response = j.at("raw_response").get<std::string>();
    v.error = j.at("error").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(where) + ": invalid record: " + e.what());
  }
  return v;
}

namespace detail {

inline nlohmann::json optional_to_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json graph_counts_to_json(const GraphCounts& c) {
  return nlohmann::json{{"entities", c.entities}, {"relations", c.relations}, {"triples", c.triples}};
}

inline nlohmann::json validation_report_to_json(const ValidationReport& r) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const Verdict& v : r.verdicts) verdicts.push_back(verdict_to_json(v));
  return nlohmann::json{
      {"agreement_rate", detail::optional_to_json(r.agreement_rate)},
      {"confusion",
       {{"labels", {"cause-effect", "component-whole"}},
        {"matrix",
         {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}}},
        {"rows", "classifier"},
        {"cols", "llm"}}},
      {"counts",
       {{"after", graph_counts_to_json(r.after)},
        {"before", graph_counts_to_json(r.before)},
        {"indeterminate", r.indeterminate.size()},
        {"removed", r.removed.size()},
        {"retained", r.retained.size()}}},
      {"precision",
       {{"cause_effect", detail::optional_to_json(r.precision_cause_effect)},
        {"component_whole", detail::optional_to_json(r.precision_component_whole)},
        {"macro", detail::optional_to_json(r.precision_macro)},
        {"micro", detail::optional_to_json(r.precision_micro)},
        {"weighted", detail::optional_to_json(r.precision_weighted)}}},
      {"verdicts", std::move(verdicts)},
  };
}

}  // namespace dream

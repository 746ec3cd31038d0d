#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dream/errors.hpp"
#include "dream/extraction.hpp"
#include "dream/validation.hpp"

namespace dream {

struct DistanceWindowRow {
  std::optional<std::size_t> window;  // nullopt = unrestricted
  std::size_t triple_count = 0;
  std::size_t determinate_count = 0;
  std::optional<double> precision;  // agreement rate within the window
};

struct DistanceReport {
  std::vector<DistanceWindowRow> rows;  // unrestricted first, then shrinking
};

// "unrestricted" plus non-negative integers, e.g. "unrestricted,5,3" or
// "3,5"; result ordered unrestricted first then descending, deduplicated.
inline std::vector<std::optional<std::size_t>> parse_windows(std::string_view text) {
  std::vector<std::optional<std::size_t>> out;
  for (const std::string& raw : split(text, ',')) {
    const std::string_view tok = trim(raw);
    if (tok.empty()) continue;
    if (tok == "unrestricted" || tok == "inf") {
      out.push_back(std::nullopt);
      continue;
    }
    std::size_t value = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') throw ConfigError("invalid distance window '" + std::string(tok) + "'");
      value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    out.push_back(value);
  }
  if (out.empty()) throw ConfigError("empty distance window list");
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (!a || !b) return static_cast<bool>(b);  // unrestricted sorts first
    return *a > *b;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline const std::vector<std::optional<std::size_t>>& default_windows() {
  static const std::vector<std::optional<std::size_t>> w = {std::nullopt, 5, 3};
  return w;
}

// Post-hoc filtering of one unrestricted run: window membership is decided by
// each triple's recorded token distance, and agreement is recomputed over the
// determinate verdicts inside the window.
inline DistanceReport distance_report(const std::vector<RelationTriple>& triples, const std::vector<Verdict>& verdicts,
                                      const std::vector<std::optional<std::size_t>>& windows = default_windows()) {
  std::map<std::string, Agreement> agreement;
  for (const Verdict& v : verdicts) agreement[v.pair_id] = v.agreement;
  DistanceReport report;
  for (const auto& window : windows) {
    DistanceWindowRow row;
    row.window = window;
    std::size_t agree = 0;
    for (const RelationTriple& t : triples) {
      if (window && t.provenance.token_distance > *window) continue;
      ++row.triple_count;
      const auto it = agreement.find(t.pair_id);
      if (it == agreement.end()) throw Error("distance_report: no verdict for triple '" + t.pair_id + "'");
      if (it->second == Agreement::kIndeterminate) continue;
      ++row.determinate_count;
      if (it->second == Agreement::kAgree) ++agree;
    }
    if (row.determinate_count > 0)
      row.precision = static_cast<double>(agree) / static_cast<double>(row.determinate_count);
    report.rows.push_back(row);
  }
  return report;
}

struct GraphSnapshotStats {
  std::size_t entities = 0;
  std::size_t relations = 0;  // unique edges
  std::size_t cause_effect = 0;
  std::size_t component_whole = 0;
  std::size_t triples = 0;  // sum of edge supports
};

struct GraphStats {
  GraphSnapshotStats before;
  GraphSnapshotStats after;
};

inline GraphSnapshotStats snapshot_stats(const RelationGraph& g) {
  GraphSnapshotStats s;
  s.entities = g.nodes.size();
  s.relations = g.edges.size();
  for (const auto& [key, edge] : g.edges) {
    s.triples += edge.support;
    if (edge.label == RelationLabel::kCauseEffect)
      ++s.cause_effect;
    else
      ++s.component_whole;
  }
  return s;
}

inline GraphStats graph_stats(const RelationGraph& before, const RelationGraph& after) {
  return {snapshot_stats(before), snapshot_stats(after)};
}

namespace detail {

inline std::string dot_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

// Deterministic DOT digraph: nodes sorted by id, edges by (subject, label,
// object); each edge carries its relation label and support count.
inline std::string export_dot(const RelationGraph& graph, const std::string& header_comment = "") {
  std::string out;
  if (!header_comment.empty()) out += header_comment;
  out += "digraph dream {\n";
  for (const auto& [id, name] : graph.nodes)
    out += "  \"" + detail::dot_escape(id) + "\" [label=\"" + detail::dot_escape(name) + "\"];\n";
  for (const auto& [key, edge] : graph.edges) {
    out += "  \"" + detail::dot_escape(edge.subject_id) + "\" -> \"" + detail::dot_escape(edge.object_id) +
           "\" [label=\"" + to_string(edge.label) + "\", support=" + std::to_string(edge.support) + "];\n";
  }
  out += "}\n";
  return out;
}

inline nlohmann::json distance_report_to_json(const DistanceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const DistanceWindowRow& row : r.rows) {
    rows.push_back(nlohmann::json{
        {"determinate_count", row.determinate_count},
        {"precision", row.precision ? nlohmann::json(*row.precision) : nlohmann::json(nullptr)},
        {"triple_count", row.triple_count},
        {"window", row.window ? nlohmann::json(*row.window) : nlohmann::json(nullptr)},
    });
  }
  return rows;
}

inline nlohmann::json snapshot_stats_to_json(const GraphSnapshotStats& s) {
  return nlohmann::json{{"cause_effect", s.cause_effect}, {"component_whole", s.component_whole},
                        {"entities", s.entities},         {"relations", s.relations},
                        {"triples", s.triples}};
}

// The bundled desk-scale result document: graph statistics, distance-window
// precision, the validation confusion matrix, and the disagreement cases
// (sentence, classifier label, LLM label).
inline nlohmann::json export_report(const GraphStats& stats, const DistanceReport& distance,
                                    const ValidationReport& validation,
                                    const std::vector<RelationTriple>& triples) {
  nlohmann::json conflicts = nlohmann::json::array();
  for (std::size_t idx : validation.removed) {
    const RelationTriple& t = triples[idx];
    const Verdict& v = validation.verdicts[idx];
    conflicts.push_back(nlohmann::json{
        {"classifier_label", to_string(t.label)},
        {"llm_label", to_string(v.llm_label)},
        {"object", t.provenance.object_surface},
        {"pair_id", t.pair_id},
        {"sentence", t.provenance.sentence_text},
        {"subject", t.provenance.subject_surface},
    });
  }
  nlohmann::json j = validation_report_to_json(validation);
  j["conflict_cases"] = std::move(conflicts);
  j["distance_report"] = distance_report_to_json(distance);
  j["graph"] = nlohmann::json{{"after", snapshot_stats_to_json(stats.after)},
                              {"before", snapshot_stats_to_json(stats.before)}};
  return j;
}

inline nlohmann::json parse_report(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: invalid structure: ") + e.what());
  }
}

}  // namespace dream

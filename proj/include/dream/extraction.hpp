#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dream/corpus.hpp"
#include "dream/ensemble.hpp"
#include "dream/errors.hpp"
#include "dream/lexicon.hpp"

namespace dream {

struct CandidatePair {
  std::string doc_id;
  std::size_t sentence_index = 0;
  DrugMention m1;  // textually first
  DrugMention m2;
  std::vector<std::string> between_tokens;  // strictly between the mentions
  std::size_t token_distance = 0;           // |between_tokens|
  std::string sentence_text;
  bool self_pair = false;  // both mentions resolve to the same drug
};

inline std::string pair_id(const CandidatePair& p) {
  return p.doc_id + ":" + std::to_string(p.sentence_index) + ":" + std::to_string(p.m1.token_begin) + "-" +
         std::to_string(p.m1.token_end) + ":" + std::to_string(p.m2.token_begin) + "-" +
         std::to_string(p.m2.token_end);
}

// All ordered same-sentence mention pairs, in position order. Self pairs are
// emitted flagged; callers decide whether to keep them.
inline std::vector<CandidatePair> generate_pairs(const Document& doc, const std::vector<DrugMention>& mentions,
                                                 std::optional<std::size_t> max_distance = std::nullopt) {
  std::vector<CandidatePair> out;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    for (std::size_t j = i + 1; j < mentions.size(); ++j) {
      const DrugMention& a = mentions[i];
      const DrugMention& b = mentions[j];
      if (a.sentence_index != b.sentence_index) continue;
      CandidatePair p;
      p.doc_id = doc.id;
      p.sentence_index = a.sentence_index;
      p.m1 = a;
      p.m2 = b;
      p.token_distance = b.token_begin - a.token_end;
      if (max_distance && p.token_distance > *max_distance) continue;
      p.between_tokens.reserve(p.token_distance);
      for (std::size_t t = a.token_end; t < b.token_begin; ++t) p.between_tokens.push_back(doc.tokens[t].text);
      const Sentence& sent = doc.sentences[a.sentence_index];
      p.sentence_text = std::string(doc.sentence_text(sent));
      p.self_pair = a.canonical_id == b.canonical_id;
      out.push_back(std::move(p));
    }
  }
  return out;
}

inline std::pair<RelationLabel, std::array<double, 3>> classify_pair(const AcordModel& model,
                                                                     const CandidatePair& pair) {
  std::array<double, 3> probs{};
  const RelationLabel label = classify_window(model, pair.between_tokens, &probs);
  return {label, probs};
}

struct TripleProvenance {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::string sentence_text;
  std::string subject_surface;
  std::string object_surface;
  std::string subject_name;  // lexicon display names
  std::string object_name;
  std::size_t token_distance = 0;
};

struct RelationTriple {
  std::string pair_id;
  std::string subject_id;  // the textually earlier mention's drug
  std::string object_id;
  RelationLabel label = RelationLabel::kCauseEffect;  // never Other
  std::array<double, 3> probs{};
  TripleProvenance provenance;
};

struct ExtractionOptions {
  std::optional<std::size_t> max_distance;
  bool keep_self_pairs = false;
};

struct ExtractionStats {
  std::size_t documents = 0;
  std::size_t documents_with_pairs = 0;
  std::size_t documents_failed = 0;
  std::size_t mentions = 0;
  std::size_t pairs_classified = 0;
  std::size_t self_pairs_dropped = 0;
  std::size_t predicted_cause_effect = 0;
  std::size_t predicted_component_whole = 0;
  std::size_t predicted_other = 0;
};

struct ExtractionResult {
  std::vector<RelationTriple> triples;
  ExtractionStats stats;
};

// The transfer step: classify every candidate pair's inter-entity text and
// keep cause-effect / component-whole predictions as triples.
inline ExtractionResult extract_relations(const std::vector<Document>& corpus, const DrugLexicon& lexicon,
                                          const AcordModel& model, const ExtractionOptions& options = {},
                                          std::vector<std::string>* warnings = nullptr) {
  ExtractionResult result;
  ExtractionStats& stats = result.stats;
  stats.documents = corpus.size();
  for (const Document& doc : corpus) {
    try {
      const std::vector<DrugMention> mentions = find_mentions(doc, lexicon);
      stats.mentions += mentions.size();
      std::vector<CandidatePair> pairs = generate_pairs(doc, mentions, options.max_distance);
      bool any = false;
      for (CandidatePair& pair : pairs) {
        if (pair.self_pair && !options.keep_self_pairs) {
          ++stats.self_pairs_dropped;
          continue;
        }
        any = true;
        ++stats.pairs_classified;
        const auto [label, probs] = classify_pair(model, pair);
        if (label == RelationLabel::kOther) {
          ++stats.predicted_other;
          continue;
        }
        if (label == RelationLabel::kCauseEffect)
          ++stats.predicted_cause_effect;
        else
          ++stats.predicted_component_whole;
        RelationTriple t;
        t.pair_id = pair_id(pair);
        t.subject_id = pair.m1.canonical_id;
        t.object_id = pair.m2.canonical_id;
        t.label = label;
        t.probs = probs;
        t.provenance.doc_id = pair.doc_id;
        t.provenance.sentence_index = pair.sentence_index;
        t.provenance.sentence_text = pair.sentence_text;
        t.provenance.subject_surface = pair.m1.surface;
        t.provenance.object_surface = pair.m2.surface;
        t.provenance.subject_name = lexicon.display_names.at(pair.m1.canonical_id);
        t.provenance.object_name = lexicon.display_names.at(pair.m2.canonical_id);
        t.provenance.token_distance = pair.token_distance;
        result.triples.push_back(std::move(t));
      }
      if (any) ++stats.documents_with_pairs;
    } catch (const Error& e) {
      ++stats.documents_failed;
      if (warnings) warnings->push_back("document '" + doc.id + "' skipped: " + e.what());
    }
  }
  if (!corpus.empty() && stats.documents_failed == corpus.size())
    throw Error("extract_relations: every document failed");
  return result;
}

struct GraphEdge {
  std::string subject_id;
  RelationLabel label = RelationLabel::kCauseEffect;
  std::string object_id;
  std::size_t support = 0;
  std::vector<RelationTriple> provenance;
};

struct RelationGraph {
  std::map<std::string, std::string> nodes;  // canonical id -> display name
  // keyed (subject, label, object) so iteration is sorted by edge identity
  std::map<std::tuple<std::string, int, std::string>, GraphEdge> edges;
};

inline RelationGraph build_graph(const std::vector<RelationTriple>& triples) {
  RelationGraph g;
  for (const RelationTriple& t : triples) {
    g.nodes.emplace(t.subject_id, t.provenance.subject_name.empty() ? t.subject_id : t.provenance.subject_name);
    g.nodes.emplace(t.object_id, t.provenance.object_name.empty() ? t.object_id : t.provenance.object_name);
    const auto key = std::make_tuple(t.subject_id, static_cast<int>(t.label), t.object_id);
    GraphEdge& e = g.edges[key];
    if (e.support == 0) {
      e.subject_id = t.subject_id;
      e.label = t.label;
      e.object_id = t.object_id;
    }
    ++e.support;
    e.provenance.push_back(t);
  }
  return g;
}

inline nlohmann::json triple_to_json(const RelationTriple& t) {
  return nlohmann::json{
      {"label", to_string(t.label)},
      {"object_id", t.object_id},
      {"pair_id", t.pair_id},
      {"probs", t.probs},
      {"provenance",
       {{"doc_id", t.provenance.doc_id},
        {"object_name", t.provenance.object_name},
        {"object_surface", t.provenance.object_surface},
        {"sentence_index", t.provenance.sentence_index},
        {"sentence_text", t.provenance.sentence_text},
        {"subject_name", t.provenance.subject_name},
        {"subject_surface", t.provenance.subject_surface},
        {"token_distance", t.provenance.token_distance}}},
      {"subject_id", t.subject_id},
  };
}

inline RelationTriple triple_from_json(const nlohmann::json& j, const char* where = "triple") {
  using detail_json = nlohmann::json;
  const auto get = [&](const detail_json& obj, const char* key) -> const detail_json& {
    if (!obj.is_object() || !obj.contains(key))
      throw ParseError(std::string(where) + ": missing field '" + key + "'");
    return obj.at(key);
  };
  RelationTriple t;
  try {
    t.pair_id = get(j, "pair_id").get<std::string>();
    t.subject_id = get(j, "subject_id").get<std::string>();
    t.object_id = get(j, "object_id").get<std::string>();
    t.label = relation_label_from_string(get(j, "label").get<std::string>());
    const auto probs = get(j, "probs").get<std::vector<double>>();
    if (probs.size() != 3) throw ParseError(std::string(where) + ": invalid field 'probs'");
    std::copy(probs.begin(), probs.end(), t.probs.begin());
    const detail_json& prov = get(j, "provenance");
    t.provenance.doc_id = get(prov, "doc_id").get<std::string>();
    t.provenance.sentence_index = get(prov, "sentence_index").get<std::size_t>();
    t.provenance.sentence_text = get(prov, "sentence_text").get<std::string>();
    t.provenance.subject_surface = get(prov, "subject_surface").get<std::string>();
    t.provenance.object_surface = get(prov, "object_surface").get<std::string>();
    t.provenance.subject_name = get(prov, "subject_name").get<std::string>();
    t.provenance.object_name = get(prov, "object_name").get<std::string>();
    t.provenance.token_distance = get(prov, "token_distance").get<std::size_t>();
  } catch (const detail_json::exception& e) {
    throw ParseError(std::string(where) + ": invalid record: " + e.what());
  }
  if (t.label == RelationLabel::kOther) throw ParseError(std::string(where) + ": label must not be 'other'");
  return t;
}

}  // namespace dream

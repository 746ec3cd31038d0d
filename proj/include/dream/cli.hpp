#pragma once

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "dream/analysis.hpp"
#include "dream/config.hpp"
#include "dream/corpus.hpp"
#include "dream/ensemble.hpp"
#include "dream/errors.hpp"
#include "dream/extraction.hpp"
#include "dream/lexicon.hpp"
#include "dream/model_io.hpp"
#include "dream/oracle.hpp"
#include "dream/prompt.hpp"
#include "dream/validation.hpp"
#include "dream/version.hpp"

namespace dream {

inline void require_input_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path not set");
  if (!std::filesystem::exists(path)) throw ConfigError(std::string(what) + " file not found: " + path);
}

// Per class, the last round(fraction * n_c) records (in input order) are held
// out; deterministic without randomness.
inline std::pair<std::vector<SemevalRecord>, std::vector<SemevalRecord>> split_holdout(
    const std::vector<SemevalRecord>& records, double fraction) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < records.size(); ++i)
    by_class[static_cast<std::size_t>(records[i].folded_label)].push_back(i);
  std::vector<char> held(records.size(), 0);
  for (const auto& indices : by_class) {
    const std::size_t k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(indices.size())));
    for (std::size_t j = indices.size() - std::min(k, indices.size()); j < indices.size(); ++j) held[indices[j]] = 1;
  }
  std::pair<std::vector<SemevalRecord>, std::vector<SemevalRecord>> out;
  for (std::size_t i = 0; i < records.size(); ++i) (held[i] ? out.second : out.first).push_back(records[i]);
  return out;
}

inline void print_metrics(const EvalMetrics& m, std::ostream& out) {
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(17) << "class" << std::setw(11) << "precision" << std::setw(8) << "recall"
      << "f1\n";
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out << std::left << std::setw(17) << to_string(static_cast<RelationLabel>(c)) << std::setw(11) << m.precision[c]
        << std::setw(8) << m.recall[c] << m.f1[c] << "\n";
  out << "accuracy " << m.accuracy << "  macro-f1 " << m.macro_f1 << "\n";
  out.unsetf(std::ios::floatfield);
}

inline void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const std::string& w : warnings) err << "warning: " << w << "\n";
}

inline AcordModel cmd_train(const RunConfig& config, const std::string& model_out, std::ostream& out,
                            std::ostream& err) {
  require_input_file(config.semeval_path, "training data");
  const std::vector<SemevalRecord> records = parse_semeval(read_file(config.semeval_path));
  std::vector<SemevalRecord> train_set = records;
  std::vector<SemevalRecord> eval_set;
  if (config.holdout > 0.0) std::tie(train_set, eval_set) = split_holdout(records, config.holdout);

  std::vector<std::string> warnings;
  const AcordModel model = train_acord(train_set, config.train, &warnings);
  print_warnings(warnings, err);
  write_file(model_out, save_model(model));
  out << "model written to " << model_out << " (" << model.feature_space.dimension() << " features, "
      << train_set.size() << " training records)\n";
  if (!eval_set.empty()) {
    out << "held-out evaluation (" << eval_set.size() << " records):\n";
    print_metrics(evaluate(model, eval_set), out);
  } else {
    out << "training-set evaluation:\n";
    print_metrics(evaluate(model, train_set), out);
  }
  return model;
}

inline ExtractionResult run_extraction(const RunConfig& config, const AcordModel& model, std::ostream& err) {
  require_input_file(config.corpus_path, "corpus");
  require_input_file(config.lexicon_path, "lexicon");
  const DrugLexicon lexicon = load_lexicon(read_file(config.lexicon_path));
  std::ifstream in(config.corpus_path);
  if (!in) throw ConfigError("corpus file not found: " + config.corpus_path);
  CorpusOptions corpus_options;
  corpus_options.min_year = config.min_year;
  const std::vector<Document> corpus = load_corpus(in, corpus_options);
  if (corpus.empty()) err << "warning: corpus is empty after filtering\n";
  ExtractionOptions options;
  options.max_distance = config.max_distance;
  options.keep_self_pairs = config.keep_self_pairs;
  std::vector<std::string> warnings;
  ExtractionResult result = extract_relations(corpus, lexicon, model, options, &warnings);
  print_warnings(warnings, err);
  return result;
}

inline void print_extraction(const ExtractionResult& result, std::ostream& out) {
  const GraphSnapshotStats s = snapshot_stats(build_graph(result.triples));
  out << "documents " << result.stats.documents << ", mentions " << result.stats.mentions << ", pairs classified "
      << result.stats.pairs_classified << " (self pairs dropped " << result.stats.self_pairs_dropped << ")\n";
  out << "predictions: cause-effect " << result.stats.predicted_cause_effect << ", component-whole "
      << result.stats.predicted_component_whole << ", other " << result.stats.predicted_other << "\n";
  out << "graph: " << s.entities << " entities, " << s.relations << " relations (" << s.cause_effect
      << " cause-effect, " << s.component_whole << " component-whole), " << s.triples << " triples\n";
}

inline ExtractionResult cmd_extract(const RunConfig& config, const std::string& triples_out, std::ostream& out,
                                    std::ostream& err) {
  require_input_file(config.model_path, "model");
  const AcordModel model = load_model(read_file(config.model_path));
  ExtractionResult result = run_extraction(config, model, err);
  write_file(triples_out, triples_to_jsonl(result.triples, artifact_header(config)));
  out << "triples written to " << triples_out << "\n";
  print_extraction(result, out);
  return result;
}

inline PromptTemplate resolve_prompt_template(const RunConfig& config) {
  if (config.prompt_template_path.empty()) return default_prompt_template();
  require_input_file(config.prompt_template_path, "prompt template");
  return parse_prompt_template(read_file(config.prompt_template_path));
}

inline std::string survivors_jsonl(const std::vector<RelationTriple>& triples, const ValidationReport& report,
                                   const nlohmann::json& header) {
  std::string out = nlohmann::json{{"header", header}}.dump() + "\n";
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (report.verdicts[i].agreement == Agreement::kDisagree) continue;
    nlohmann::json j = triple_to_json(triples[i]);
    j["agreement"] = to_string(report.verdicts[i].agreement);
    j["llm_label"] = to_string(report.verdicts[i].llm_label);
    out += j.dump() + "\n";
  }
  return out;
}

inline ValidationReport cmd_validate(const RunConfig& config, const std::string& triples_in,
                                     const std::string& survivors_out, const std::string& validation_out,
                                     std::ostream& out, std::ostream& err) {
  require_input_file(triples_in, "triples");
  const TriplesFile file = parse_triples_jsonl(read_file(triples_in));
  const PromptTemplate tpl = resolve_prompt_template(config);
  OracleClient client(config.oracle);
  if (file.triples.empty()) err << "warning: no triples to validate\n";
  const ValidationReport report = validate(file.triples, client, tpl);

  nlohmann::json j = validation_report_to_json(report);
  j["config"] = run_config_to_json(config);
  j["tool_version"] = kToolVersion;
  write_file(validation_out, j.dump(2) + "\n");
  write_file(survivors_out, survivors_jsonl(file.triples, report, artifact_header(config)));

  out << "verdicts: " << report.retained.size() << " agree, " << report.removed.size() << " disagree, "
      << report.indeterminate.size() << " indeterminate\n";
  if (report.agreement_rate)
    out << "agreement rate " << std::fixed << std::setprecision(4) << *report.agreement_rate << "\n";
  else
    out << "agreement rate undefined (no determinate verdicts)\n";
  out.unsetf(std::ios::floatfield);
  out << "relations " << report.before.relations << " -> " << report.after.relations << ", entities "
      << report.before.entities << " -> " << report.after.entities << "\n";
  out << "report written to " << validation_out << ", survivors to " << survivors_out << "\n";
  return report;
}

struct AnalyzeResult {
  ValidationReport validation;
  DistanceReport distance;
  GraphStats stats;
};

inline std::vector<Verdict> read_verdicts(const std::string& validation_path,
                                          const std::vector<RelationTriple>& triples) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(validation_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("validation file " + validation_path + ": " + e.what());
  }
  if (!j.contains("verdicts")) throw ParseError("validation file " + validation_path + ": missing field 'verdicts'");
  std::map<std::string, Verdict> by_id;
  for (const nlohmann::json& vj : j.at("verdicts")) {
    Verdict v = verdict_from_json(vj);
    by_id[v.pair_id] = std::move(v);
  }
  std::vector<Verdict> aligned;
  aligned.reserve(triples.size());
  for (const RelationTriple& t : triples) {
    const auto it = by_id.find(t.pair_id);
    if (it == by_id.end())
      throw ParseError("validation file " + validation_path + ": no verdict for triple '" + t.pair_id + "'");
    aligned.push_back(it->second);
  }
  return aligned;
}

inline std::string dot_header(const RunConfig& config) {
  return "// tool_version " + std::string(kToolVersion) + "\n// config " + run_config_to_json(config).dump() + "\n";
}

inline AnalyzeResult cmd_analyze(const RunConfig& config, const std::string& triples_in,
                                 const std::string& validation_in, const std::string& report_out,
                                 const std::string& dot_before_out, const std::string& dot_after_out,
                                 std::ostream& out, std::ostream& err) {
  (void)err;
  require_input_file(triples_in, "triples");
  require_input_file(validation_in, "validation report");
  const TriplesFile file = parse_triples_jsonl(read_file(triples_in));
  const std::vector<Verdict> verdicts = read_verdicts(validation_in, file.triples);

  AnalyzeResult result;
  result.validation = assemble_report(file.triples, verdicts);
  result.distance = distance_report(file.triples, result.validation.verdicts, config.windows);
  std::vector<RelationTriple> survivors;
  for (std::size_t i = 0; i < file.triples.size(); ++i)
    if (result.validation.verdicts[i].agreement != Agreement::kDisagree) survivors.push_back(file.triples[i]);
  const RelationGraph graph_before = build_graph(file.triples);
  const RelationGraph graph_after = build_graph(survivors);
  result.stats = graph_stats(graph_before, graph_after);

  nlohmann::json report = export_report(result.stats, result.distance, result.validation, file.triples);
  report["config"] = run_config_to_json(config);
  report["tool_version"] = kToolVersion;
  write_file(report_out, report.dump(2) + "\n");
  write_file(dot_before_out, dot_header(config) + export_dot(graph_before));
  write_file(dot_after_out, dot_header(config) + export_dot(graph_after));

  out << "windows:\n";
  for (const DistanceWindowRow& row : result.distance.rows) {
    out << "  ";
    if (row.window)
      out << "<= " << *row.window;
    else
      out << "unrestricted";
    out << ": " << row.triple_count << " triples, ";
    if (row.precision)
      out << "precision " << std::fixed << std::setprecision(4) << *row.precision;
    else
      out << "precision undefined";
    out.unsetf(std::ios::floatfield);
    out << "\n";
  }
  out << "report written to " << report_out << "\n";
  return result;
}

inline void cmd_run(const RunConfig& config, const std::string& out_dir, bool force, std::ostream& out,
                    std::ostream& err) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError("output path is not a directory: " + out_dir);
    if (!fs::is_empty(dir) && !force)
      throw ConfigError("output directory " + out_dir + " is not empty; pass --force to overwrite");
  }
  fs::create_directories(dir);

  RunConfig effective = config;
  AcordModel model;
  if (!config.model_path.empty()) {
    require_input_file(config.model_path, "model");
    model = load_model(read_file(config.model_path));
    out << "loaded model " << config.model_path << "\n";
  } else {
    model = cmd_train(effective, (dir / "model.json").string(), out, err);
    effective.model_path = (dir / "model.json").string();
  }

  ExtractionResult extraction = run_extraction(effective, model, err);
  write_file((dir / "triples.jsonl").string(), triples_to_jsonl(extraction.triples, artifact_header(effective)));
  print_extraction(extraction, out);

  const PromptTemplate tpl = resolve_prompt_template(effective);
  OracleClient client(effective.oracle);
  const ValidationReport validation = validate(extraction.triples, client, tpl);
  nlohmann::json vj = validation_report_to_json(validation);
  vj["config"] = run_config_to_json(effective);
  vj["tool_version"] = kToolVersion;
  write_file((dir / "validation.json").string(), vj.dump(2) + "\n");
  write_file((dir / "survivors.jsonl").string(),
             survivors_jsonl(extraction.triples, validation, artifact_header(effective)));
  out << "verdicts: " << validation.retained.size() << " agree, " << validation.removed.size() << " disagree, "
      << validation.indeterminate.size() << " indeterminate\n";

  cmd_analyze(effective, (dir / "triples.jsonl").string(), (dir / "validation.json").string(),
              (dir / "report.json").string(), (dir / "graph_before.dot").string(), (dir / "graph_after.dot").string(),
              out, err);
  out << "artifacts in " << out_dir << "\n";
}

}  // namespace dream

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dream/cli.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<double> holdout;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_distance;
  std::optional<int> min_year;
  bool keep_self_pairs = false;
  std::string windows;
  std::string oracle_mode;
  std::string semeval;
  std::string corpus;
  std::string lexicon;
  std::string model;
  std::string prompt_template;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run configuration file");
  cmd->add_option("--seed", opts.seed, "random seed for the tree learners");
}

void add_train_opts(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--semeval", opts.semeval, "relation-classification training file");
  cmd->add_option("--holdout", opts.holdout, "fraction of records held out for evaluation");
}

void add_extract_opts(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--corpus", opts.corpus, "abstract corpus (JSONL)");
  cmd->add_option("--lexicon", opts.lexicon, "drug lexicon (TSV)");
  cmd->add_option("--max-distance", opts.max_distance, "drop pairs farther apart than this many tokens");
  cmd->add_option("--min-year", opts.min_year, "skip documents published before this year");
  cmd->add_flag("--keep-self-pairs", opts.keep_self_pairs, "keep pairs whose mentions share a canonical id");
}

void add_oracle_opts(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--mode", opts.oracle_mode, "oracle mode: live, cached_only, or mock");
  cmd->add_option("--prompt-template", opts.prompt_template, "prompt template file (system ---\\n user)");
}

dream::RunConfig resolve_config(const CommonOpts& opts) {
  dream::RunConfig config;
  if (!opts.config_path.empty()) config = dream::load_run_config(opts.config_path);
  if (opts.seed) config.train.seed = *opts.seed;
  if (opts.holdout) {
    if (*opts.holdout < 0.0 || *opts.holdout >= 1.0) throw dream::ConfigError("holdout must be in [0, 1)");
    config.holdout = *opts.holdout;
  }
  if (opts.max_distance) {
    if (*opts.max_distance < 0) throw dream::ConfigError("max-distance must be >= 0");
    config.max_distance = *opts.max_distance;
  }
  if (opts.min_year) config.min_year = *opts.min_year;
  if (opts.keep_self_pairs) config.keep_self_pairs = true;
  if (!opts.windows.empty()) config.windows = dream::parse_windows(opts.windows);
  if (!opts.oracle_mode.empty()) config.oracle.mode = dream::oracle_mode_from_string(opts.oracle_mode);
  if (!opts.semeval.empty()) config.semeval_path = opts.semeval;
  if (!opts.corpus.empty()) config.corpus_path = opts.corpus;
  if (!opts.lexicon.empty()) config.lexicon_path = opts.lexicon;
  if (!opts.model.empty()) config.model_path = opts.model;
  if (!opts.prompt_template.empty()) config.prompt_template_path = opts.prompt_template;
  config.train.check();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drug relation extraction and mining pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dream::kToolVersion));

  CommonOpts opts;
  std::string triples_in;
  std::string validation_in;
  std::string model_out = "model.json";
  std::string triples_out = "triples.jsonl";
  std::string survivors_out = "survivors.jsonl";
  std::string validation_out = "validation.json";
  std::string report_out = "report.json";
  std::string dot_before_out = "graph_before.dot";
  std::string dot_after_out = "graph_after.dot";
  std::string out_dir = "dream_out";
  bool force = false;

  CLI::App* train = app.add_subcommand("train", "train the relation classifier");
  add_common(train, opts);
  add_train_opts(train, opts);
  train->add_option("--model-out", model_out, "where to write the trained model");

  CLI::App* extract = app.add_subcommand("extract", "extract candidate relation triples from a corpus");
  add_common(extract, opts);
  add_extract_opts(extract, opts);
  extract->add_option("--model", opts.model, "trained model file");
  extract->add_option("--triples-out", triples_out, "where to write extracted triples (JSONL)");

  CLI::App* validate = app.add_subcommand("validate", "check extracted triples against the language-model oracle");
  add_common(validate, opts);
  add_oracle_opts(validate, opts);
  validate->add_option("--triples", triples_in, "extracted triples file (JSONL)")->required();
  validate->add_option("--survivors-out", survivors_out, "where to write surviving triples");
  validate->add_option("--validation-out", validation_out, "where to write the validation report");

  CLI::App* analyze = app.add_subcommand("analyze", "compute distance windows, graph stats, and reports");
  add_common(analyze, opts);
  analyze->add_option("--triples", triples_in, "extracted triples file (JSONL)")->required();
  analyze->add_option("--validation", validation_in, "validation report from the validate step")->required();
  analyze->add_option("--windows", opts.windows, "comma-separated distance windows (e.g. unrestricted,5,3)");
  analyze->add_option("--report-out", report_out, "where to write the analysis report");
  analyze->add_option("--dot-before-out", dot_before_out, "where to write the pre-validation graph (DOT)");
  analyze->add_option("--dot-after-out", dot_after_out, "where to write the post-validation graph (DOT)");

  CLI::App* run = app.add_subcommand("run", "run the full pipeline into an output directory");
  add_common(run, opts);
  add_train_opts(run, opts);
  add_extract_opts(run, opts);
  add_oracle_opts(run, opts);
  run->add_option("--model", opts.model, "use this trained model instead of training");
  run->add_option("--windows", opts.windows, "comma-separated distance windows");
  run->add_option("--out-dir", out_dir, "artifact output directory");
  run->add_flag("--force", force, "allow writing into a non-empty output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const dream::RunConfig config = resolve_config(opts);
    if (train->parsed()) {
      dream::cmd_train(config, model_out, std::cout, std::cerr);
    } else if (extract->parsed()) {
      dream::cmd_extract(config, triples_out, std::cout, std::cerr);
    } else if (validate->parsed()) {
      dream::cmd_validate(config, triples_in, survivors_out, validation_out, std::cout, std::cerr);
    } else if (analyze->parsed()) {
      dream::cmd_analyze(config, triples_in, validation_in, report_out, dot_before_out, dot_after_out, std::cout,
                         std::cerr);
    } else if (run->parsed()) {
      dream::cmd_run(config, out_dir, force, std::cout, std::cerr);
    }
  } catch (const dream::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dream::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dream/cli.hpp"
#include "dream/util.hpp"

using nlohmann::json;
using namespace dream;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("dream_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string fixture(const std::string& name) { return std::string(DREAM_FIXTURE_DIR) + "/" + name; }

RunConfig base_config() {
  RunConfig c;
  c.semeval_path = fixture("semeval_synthetic.txt");
  c.corpus_path = fixture("corpus.jsonl");
  c.lexicon_path = fixture("lexicon.tsv");
  c.oracle.mode = OracleMode::kMock;
  c.oracle.mock_fixture = fixture("oracle_mock.json");
  return c;
}

// One trained model shared by every extraction-level test in this file.
const std::string& shared_model_path() {
  static const TempDir dir;
  static const std::string path = [] {
    std::ostringstream out, err;
    const std::string p = (dir.path / "model.json").string();
    cmd_train(base_config(), p, out, err);
    return p;
  }();
  return path;
}

SemevalRecord sem(int id, RelationLabel label) {
  SemevalRecord r;
  r.id = id;
  r.folded_label = label;
  return r;
}

std::vector<int> ids(const std::vector<SemevalRecord>& records) {
  std::vector<int> out;
  for (const SemevalRecord& r : records) out.push_back(r.id);
  return out;
}

// Runs the installed binary with cwd and captured streams; returns the exit code.
int run_cli(const std::string& args, const fs::path& cwd, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  static std::atomic<int> counter{0};
  const std::string tag = std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1));
  const fs::path out_path = fs::temp_directory_path() / ("dream_cli_stdout_" + tag);
  const fs::path err_path = fs::temp_directory_path() / ("dream_cli_stderr_" + tag);
  const std::string command = "cd " + cwd.string() + " && " + DREAM_CLI_BIN + " " + args + " >" + out_path.string() +
                              " 2>" + err_path.string();
  const int status = std::system(command.c_str());
  if (out_text) *out_text = read_file(out_path);
  if (err_text) *err_text = read_file(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("require_input_file distinguishes unset and missing paths") {
  CHECK_THROWS_MATCHES(require_input_file("", "training data"), ConfigError,
                       MessageMatches(ContainsSubstring("training data path not set")));
  CHECK_THROWS_MATCHES(require_input_file("/nonexistent/file.txt", "corpus"), ConfigError,
                       MessageMatches(ContainsSubstring("corpus file not found: /nonexistent/file.txt")));
  CHECK_NOTHROW(require_input_file(fixture("lexicon.tsv"), "lexicon"));
}

TEST_CASE("split_holdout holds out the last records of each class") {
  const std::vector<SemevalRecord> records = {
      sem(1, RelationLabel::kCauseEffect),    sem(5, RelationLabel::kComponentWhole),
      sem(7, RelationLabel::kOther),          sem(2, RelationLabel::kCauseEffect),
      sem(6, RelationLabel::kComponentWhole), sem(8, RelationLabel::kOther),
      sem(3, RelationLabel::kCauseEffect),    sem(4, RelationLabel::kCauseEffect),
  };
  const auto [train, eval] = split_holdout(records, 0.5);
  CHECK(ids(train) == std::vector<int>{1, 5, 7, 2});
  CHECK(ids(eval) == std::vector<int>{6, 8, 3, 4});
}

TEST_CASE("split_holdout boundary fractions") {
  const std::vector<SemevalRecord> records = {sem(1, RelationLabel::kOther), sem(2, RelationLabel::kOther)};
  SECTION("zero keeps everything for training") {
    const auto [train, eval] = split_holdout(records, 0.0);
    CHECK(train.size() == 2);
    CHECK(eval.empty());
  }
  SECTION("per-class count rounds half away from zero") {
    const auto [train, eval] = split_holdout(records, 0.25);  // lround(0.5) == 1
    CHECK(ids(train) == std::vector<int>{1});
    CHECK(ids(eval) == std::vector<int>{2});
  }
  SECTION("a fraction near one can exhaust a class") {
    const auto [train, eval] = split_holdout({sem(9, RelationLabel::kOther)}, 0.9);
    CHECK(train.empty());
    CHECK(ids(eval) == std::vector<int>{9});
  }
}

TEST_CASE("dot_header carries the tool version and config echo") {
  RunConfig config = base_config();
  config.train.seed = 77;
  const std::string header = dot_header(config);
  CHECK(header.rfind("// tool_version 0.1.0\n// config ", 0) == 0);
  const std::string line = header.substr(header.find("// config ") + 10);
  CHECK(json::parse(line) == run_config_to_json(config));
}

TEST_CASE("survivors_jsonl keeps agree and indeterminate rows with their verdicts") {
  std::vector<RelationTriple> triples(3);
  triples[0].pair_id = "a";
  triples[1].pair_id = "b";
  triples[2].pair_id = "c";
  for (auto& t : triples) {
    t.subject_id = "DB00001";
    t.object_id = "DB00002";
    t.label = RelationLabel::kCauseEffect;
    t.probs = {0.6, 0.2, 0.2};
  }
  ValidationReport report;
  report.verdicts.resize(3);
  report.verdicts[0] = {"a", LlmLabel::kCauseEffect, Agreement::kAgree, "Cause-Effect", ""};
  report.verdicts[1] = {"b", LlmLabel::kComponentWhole, Agreement::kDisagree, "Component-Whole", ""};
  report.verdicts[2] = {"c", LlmLabel::kIndeterminate, Agreement::kIndeterminate, "unclear", ""};

  const std::string text = survivors_jsonl(triples, report, json{{"note", "hdr"}});
  const std::vector<std::string> lines = split_lines(text);
  REQUIRE(lines.size() == 3);
  CHECK(json::parse(lines[0]).at("header").at("note") == "hdr");

  const json row_a = json::parse(lines[1]);
  CHECK(row_a.at("pair_id") == "a");
  CHECK(row_a.at("agreement") == "agree");
  CHECK(row_a.at("llm_label") == "cause-effect");

  const json row_c = json::parse(lines[2]);
  CHECK(row_c.at("pair_id") == "c");
  CHECK(row_c.at("agreement") == "indeterminate");
  CHECK(row_c.at("llm_label") == "indeterminate");
  CHECK(text.find("\"b\"") == std::string::npos);
}

TEST_CASE("read_verdicts aligns stored verdicts with triples by pair id") {
  TempDir dir;
  std::vector<RelationTriple> triples(2);
  triples[0].pair_id = "x";
  triples[1].pair_id = "y";

  Verdict vx{"x", LlmLabel::kCauseEffect, Agreement::kAgree, "Cause-Effect", ""};
  Verdict vy{"y", LlmLabel::kComponentWhole, Agreement::kDisagree, "Component-Whole", ""};
  const fs::path path = dir.path / "validation.json";

  SECTION("order in the file does not matter") {
    write_file(path.string(), json{{"verdicts", {verdict_to_json(vy), verdict_to_json(vx)}}}.dump());
    const std::vector<Verdict> aligned = read_verdicts(path.string(), triples);
    REQUIRE(aligned.size() == 2);
    CHECK(aligned[0].pair_id == "x");
    CHECK(aligned[0].agreement == Agreement::kAgree);
    CHECK(aligned[1].pair_id == "y");
    CHECK(aligned[1].agreement == Agreement::kDisagree);
  }
  SECTION("a triple without a verdict is an error") {
    write_file(path.string(), json{{"verdicts", {verdict_to_json(vx)}}}.dump());
    CHECK_THROWS_MATCHES(read_verdicts(path.string(), triples), ParseError,
                         MessageMatches(ContainsSubstring("no verdict for triple 'y'")));
  }
  SECTION("the verdicts field is required") {
    write_file(path.string(), json{{"precision", 1.0}}.dump());
    CHECK_THROWS_MATCHES(read_verdicts(path.string(), triples), ParseError,
                         MessageMatches(ContainsSubstring("missing field 'verdicts'")));
  }
  SECTION("malformed json names the file") {
    write_file(path.string(), "{broken");
    CHECK_THROWS_MATCHES(read_verdicts(path.string(), triples), ParseError,
                         MessageMatches(ContainsSubstring(path.string())));
  }
}

TEST_CASE("resolve_prompt_template falls back to the embedded default") {
  RunConfig config = base_config();
  const PromptTemplate def = resolve_prompt_template(config);
  CHECK(def.system_text == default_prompt_template().system_text);
  CHECK(def.user_text == default_prompt_template().user_text);

  config.prompt_template_path = "/nonexistent/prompt.txt";
  CHECK_THROWS_MATCHES(resolve_prompt_template(config), ConfigError,
                       MessageMatches(ContainsSubstring("prompt template file not found")));

  TempDir dir;
  const fs::path path = dir.path / "prompt.txt";
  write_file(path.string(), "You judge drug relations.\n---\n{sentence} | {ent1} | {ent2}\n");
  config.prompt_template_path = path.string();
  const PromptTemplate custom = resolve_prompt_template(config);
  CHECK(custom.system_text == "You judge drug relations.");
  CHECK(custom.user_text == "{sentence} | {ent1} | {ent2}");
}

TEST_CASE("cmd_train writes a loadable model and reports training metrics") {
  TempDir dir;
  const std::string model_path = (dir.path / "model.json").string();
  std::ostringstream out, err;
  cmd_train(base_config(), model_path, out, err);

  CHECK_THAT(out.str(), ContainsSubstring("model written to " + model_path));
  CHECK_THAT(out.str(), ContainsSubstring("30 training records"));
  CHECK_THAT(out.str(), ContainsSubstring("training-set evaluation:"));
  CHECK_THAT(out.str(), ContainsSubstring("accuracy 1.0000  macro-f1 1.0000"));
  CHECK_THAT(err.str(), ContainsSubstring("warning:"));
  CHECK_THAT(err.str(), ContainsSubstring("selecting all"));

  const AcordModel model = load_model(read_file(model_path));
  CHECK(model.feature_space.dimension() > 0);
}

TEST_CASE("cmd_train with holdout reports held-out metrics") {
  TempDir dir;
  RunConfig config = base_config();
  config.holdout = 0.2;  // 30 records, 10 per class -> 6 held out
  std::ostringstream out, err;
  cmd_train(config, (dir.path / "model.json").string(), out, err);
  CHECK_THAT(out.str(), ContainsSubstring("24 training records"));
  CHECK_THAT(out.str(), ContainsSubstring("held-out evaluation (6 records):"));
}

TEST_CASE("cmd_train validates its input path") {
  std::ostringstream out, err;
  RunConfig config = base_config();
  config.semeval_path.clear();
  CHECK_THROWS_MATCHES(cmd_train(config, "model.json", out, err), ConfigError,
                       MessageMatches(ContainsSubstring("training data path not set")));
  config.semeval_path = "/nonexistent/train.txt";
  CHECK_THROWS_MATCHES(cmd_train(config, "model.json", out, err), ConfigError,
                       MessageMatches(ContainsSubstring("training data file not found")));
}

TEST_CASE("cmd_extract writes the triples artifact with a config header") {
  TempDir dir;
  RunConfig config = base_config();
  config.model_path = shared_model_path();
  const std::string triples_path = (dir.path / "triples.jsonl").string();
  std::ostringstream out, err;
  cmd_extract(config, triples_path, out, err);

  CHECK_THAT(out.str(), ContainsSubstring("triples written to " + triples_path));
  CHECK_THAT(out.str(), ContainsSubstring("documents 10, mentions 19, pairs classified 7 (self pairs dropped 1)"));
  CHECK_THAT(out.str(), ContainsSubstring("predictions: cause-effect 4, component-whole 2, other 1"));
  CHECK_THAT(out.str(),
             ContainsSubstring("graph: 8 entities, 5 relations (3 cause-effect, 2 component-whole), 6 triples"));

  const TriplesFile file = parse_triples_jsonl(read_file(triples_path));
  REQUIRE(file.triples.size() == 6);
  CHECK(file.header.at("tool_version") == kToolVersion);
  CHECK(file.header.at("config") == run_config_to_json(config));
  CHECK(file.triples[0].pair_id == "PM001:0:0-1:4-5");
  CHECK(file.triples[5].pair_id == "PM010:0:0-1:5-6");
}

TEST_CASE("cmd_extract requires a model") {
  std::ostringstream out, err;
  RunConfig config = base_config();
  CHECK_THROWS_MATCHES(cmd_extract(config, "triples.jsonl", out, err), ConfigError,
                       MessageMatches(ContainsSubstring("model path not set")));
}

TEST_CASE("cmd_validate writes survivors and the validation report") {
  TempDir dir;
  RunConfig config = base_config();
  config.model_path = shared_model_path();
  const std::string triples_path = (dir.path / "triples.jsonl").string();
  {
    std::ostringstream out, err;
    cmd_extract(config, triples_path, out, err);
  }

  const std::string survivors_path = (dir.path / "survivors.jsonl").string();
  const std::string validation_path = (dir.path / "validation.json").string();
  std::ostringstream out, err;
  const ValidationReport report = cmd_validate(config, triples_path, survivors_path, validation_path, out, err);

  CHECK(report.retained.size() == 4);
  CHECK_THAT(out.str(), ContainsSubstring("verdicts: 4 agree, 1 disagree, 1 indeterminate"));
  CHECK_THAT(out.str(), ContainsSubstring("agreement rate 0.8000"));
  CHECK_THAT(out.str(), ContainsSubstring("relations 5 -> 4, entities 8 -> 6"));

  const json vj = json::parse(read_file(validation_path));
  CHECK(vj.at("tool_version") == kToolVersion);
  CHECK(vj.at("config") == run_config_to_json(config));
  CHECK(vj.at("verdicts").size() == 6);
  CHECK(vj.at("agreement_rate") == 0.8);

  const std::vector<std::string> lines = split_lines(read_file(survivors_path));
  REQUIRE(lines.size() == 6);  // header + 4 agree + 1 indeterminate
  CHECK(json::parse(lines[0]).contains("header"));
  std::vector<std::string> pair_ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json row = json::parse(lines[i]);
    pair_ids.push_back(row.at("pair_id"));
    CHECK(row.contains("agreement"));
    CHECK(row.contains("llm_label"));
  }
  const std::vector<std::string> expected = {"PM001:0:0-1:4-5", "PM002:0:1-2:4-5", "PM006:0:2-4:6-8",
                                             "PM009:0:0-1:6-7", "PM010:0:0-1:5-6"};
  CHECK(pair_ids == expected);  // the PM003 disagree is gone, order preserved
  const json indeterminate_row = json::parse(lines[4]);
  CHECK(indeterminate_row.at("agreement") == "indeterminate");
  CHECK(indeterminate_row.at("llm_label") == "indeterminate");
}

TEST_CASE("cmd_validate handles an empty triples file") {
  TempDir dir;
  RunConfig config = base_config();
  const std::string triples_path = (dir.path / "triples.jsonl").string();
  write_file(triples_path, triples_to_jsonl({}, artifact_header(config)));
  std::ostringstream out, err;
  const ValidationReport report = cmd_validate(config, triples_path, (dir.path / "survivors.jsonl").string(),
                                               (dir.path / "validation.json").string(), out, err);
  CHECK(report.verdicts.empty());
  CHECK_THAT(err.str(), ContainsSubstring("no triples to validate"));
  CHECK_THAT(out.str(), ContainsSubstring("agreement rate undefined"));
  CHECK(split_lines(read_file((dir.path / "survivors.jsonl").string())).size() == 1);
}

TEST_CASE("cmd_analyze writes the report and both graph snapshots") {
  TempDir dir;
  RunConfig config = base_config();
  config.model_path = shared_model_path();
  const std::string triples_path = (dir.path / "triples.jsonl").string();
  const std::string validation_path = (dir.path / "validation.json").string();
  {
    std::ostringstream out, err;
    cmd_extract(config, triples_path, out, err);
    cmd_validate(config, triples_path, (dir.path / "survivors.jsonl").string(), validation_path, out, err);
  }

  const std::string report_path = (dir.path / "report.json").string();
  const std::string before_path = (dir.path / "graph_before.dot").string();
  const std::string after_path = (dir.path / "graph_after.dot").string();
  std::ostringstream out, err;
  const AnalyzeResult result =
      cmd_analyze(config, triples_path, validation_path, report_path, before_path, after_path, out, err);

  CHECK_THAT(out.str(), ContainsSubstring("windows:"));
  CHECK_THAT(out.str(), ContainsSubstring("unrestricted: 6 triples, precision 0.8000"));
  CHECK_THAT(out.str(), ContainsSubstring("<= 5: 5 triples, precision 1.0000"));
  CHECK_THAT(out.str(), ContainsSubstring("<= 3: 3 triples, precision 1.0000"));
  CHECK_THAT(out.str(), ContainsSubstring("report written to " + report_path));

  REQUIRE(result.distance.rows.size() == 3);
  CHECK(result.stats.before.relations == 5);
  CHECK(result.stats.after.relations == 4);
  CHECK(result.stats.after.entities == 6);

  const json report = json::parse(read_file(report_path));
  CHECK(report.at("tool_version") == kToolVersion);
  CHECK(report.at("config") == run_config_to_json(config));

  for (const std::string& path : {before_path, after_path}) {
    const std::string dot = read_file(path);
    CHECK(dot.rfind(dot_header(config), 0) == 0);
    CHECK_THAT(dot, ContainsSubstring("digraph"));
  }
  CHECK_THAT(read_file(before_path), ContainsSubstring("DB00003"));
  CHECK(read_file(after_path).find("DB00003") == std::string::npos);
}

TEST_CASE("cmd_analyze rejects a validation file for different triples") {
  TempDir dir;
  RunConfig config = base_config();
  config.model_path = shared_model_path();
  const std::string triples_path = (dir.path / "triples.jsonl").string();
  {
    std::ostringstream out, err;
    cmd_extract(config, triples_path, out, err);
  }
  const Verdict stray{"XX:0:0-1:2-3", LlmLabel::kCauseEffect, Agreement::kAgree, "Cause-Effect", ""};
  const std::string validation_path = (dir.path / "validation.json").string();
  write_file(validation_path, json{{"verdicts", {verdict_to_json(stray)}}}.dump());
  std::ostringstream out, err;
  CHECK_THROWS_MATCHES(cmd_analyze(config, triples_path, validation_path, (dir.path / "report.json").string(),
                                   (dir.path / "b.dot").string(), (dir.path / "a.dot").string(), out, err),
                       ParseError, MessageMatches(ContainsSubstring("no verdict for triple")));
}

TEST_CASE("cmd_run produces the full artifact tree") {
  TempDir dir;
  RunConfig config = base_config();
  const std::string out_dir = (dir.path / "out").string();
  std::ostringstream out, err;
  cmd_run(config, out_dir, false, out, err);

  for (const char* name : {"model.json", "triples.jsonl", "validation.json", "survivors.jsonl", "report.json",
                           "graph_before.dot", "graph_after.dot"})
    CHECK(fs::exists(fs::path(out_dir) / name));
  CHECK_THAT(out.str(), ContainsSubstring("model written to"));
  CHECK_THAT(out.str(), ContainsSubstring("verdicts: 4 agree, 1 disagree, 1 indeterminate"));
  CHECK_THAT(out.str(), ContainsSubstring("artifacts in " + out_dir));

  SECTION("a non-empty output directory requires force") {
    std::ostringstream out2, err2;
    CHECK_THROWS_MATCHES(cmd_run(config, out_dir, false, out2, err2), ConfigError,
                         MessageMatches(ContainsSubstring("not empty; pass --force")));
    CHECK_NOTHROW(cmd_run(config, out_dir, true, out2, err2));
  }
  SECTION("the output path must be a directory") {
    const std::string blocker = (dir.path / "blocker").string();
    write_file(blocker, "x");
    std::ostringstream out2, err2;
    CHECK_THROWS_MATCHES(cmd_run(config, blocker, false, out2, err2), ConfigError,
                         MessageMatches(ContainsSubstring("output path is not a directory")));
  }
}

TEST_CASE("cmd_run with a prebuilt model skips training and is byte deterministic") {
  TempDir dir;
  RunConfig config = base_config();
  config.model_path = shared_model_path();
  const fs::path dir_a = dir.path / "a";
  const fs::path dir_b = dir.path / "b";
  std::ostringstream out_a, out_b, err;
  cmd_run(config, dir_a.string(), false, out_a, err);
  cmd_run(config, dir_b.string(), false, out_b, err);

  CHECK_THAT(out_a.str(), ContainsSubstring("loaded model " + config.model_path));
  CHECK(!fs::exists(dir_a / "model.json"));
  for (const char* name :
       {"triples.jsonl", "validation.json", "survivors.jsonl", "report.json", "graph_before.dot", "graph_after.dot"}) {
    CHECK(read_file(dir_a / name) == read_file(dir_b / name));
  }
  CHECK(out_b.str().find("model written to") == std::string::npos);
}

TEST_CASE("pipeline artifacts are byte-identical to the frozen goldens") {
  // The goldens were produced by `dream run --config config.json --out-dir out`
  // in a directory holding copies of the fixture inputs, so every embedded
  // path is relative and the bytes are machine-independent.
  TempDir dir;
  for (const char* name :
       {"config.json", "semeval_synthetic.txt", "corpus.jsonl", "lexicon.tsv", "oracle_mock.json"})
    fs::copy_file(fixture(name), dir.path / name);

  std::string out, err;
  const int code = run_cli("run --config config.json --out-dir out", dir.path, &out, &err);
  INFO(err);
  REQUIRE(code == 0);

  for (const char* name : {"model.json", "triples.jsonl", "validation.json", "survivors.jsonl", "report.json",
                           "graph_before.dot", "graph_after.dot"}) {
    INFO(name);
    CHECK(read_file(dir.path / "out" / name) == read_file(std::string(DREAM_GOLDEN_DIR) + "/run/" + name));
  }
}

TEST_CASE("cli binary reports its version and rejects bad usage") {
  TempDir dir;
  std::string out, err;
  CHECK(run_cli("--version", dir.path, &out, &err) == 0);
  CHECK(out == std::string(kToolVersion) + "\n");
  CHECK(run_cli("", dir.path, &out, &err) == 2);               // a subcommand is required
  CHECK(run_cli("train --bogus", dir.path, &out, &err) == 2);  // unknown flag
  CHECK(run_cli("validate", dir.path, &out, &err) == 2);       // missing required --triples
  CHECK(run_cli("train --holdout 1.5 --semeval x", dir.path, &out, &err) == 2);
  CHECK(run_cli("extract --max-distance -1 --corpus x", dir.path, &out, &err) == 2);
}

TEST_CASE("cli binary distinguishes config errors from runtime errors") {
  TempDir dir;
  std::string out, err;
  CHECK(run_cli("train --semeval /nonexistent/train.txt", dir.path, &out, &err) == 2);
  CHECK_THAT(err, ContainsSubstring("error: training data file not found"));

  write_file((dir.path / "corrupt.json").string(), "not a model");
  CHECK(run_cli("extract --model corrupt.json", dir.path, &out, &err) == 1);
  CHECK_THAT(err, ContainsSubstring("error:"));
}

TEST_CASE("cli binary runs the pipeline end to end from a config file") {
  TempDir dir;
  const fs::path fixtures(DREAM_FIXTURE_DIR);
  const std::string out_dir = (dir.path / "out").string();
  std::string out, err;

  const int code = run_cli("run --config config.json --out-dir " + out_dir, fixtures, &out, &err);
  INFO(err);
  REQUIRE(code == 0);
  CHECK_THAT(out, ContainsSubstring("artifacts in " + out_dir));
  for (const char* name : {"model.json", "triples.jsonl", "validation.json", "survivors.jsonl", "report.json",
                           "graph_before.dot", "graph_after.dot"})
    CHECK(fs::exists(fs::path(out_dir) / name));

  CHECK(run_cli("run --config config.json --out-dir " + out_dir, fixtures, &out, &err) == 2);
  CHECK_THAT(err, ContainsSubstring("pass --force"));
  CHECK(run_cli("run --config config.json --out-dir " + out_dir + " --force", fixtures, &out, &err) == 0);

  const int analyze_code =
      run_cli("analyze --triples " + out_dir + "/triples.jsonl --validation " + out_dir +
                  "/validation.json --windows unrestricted,4 --report-out " + (dir.path / "r.json").string() +
                  " --dot-before-out " + (dir.path / "b.dot").string() + " --dot-after-out " +
                  (dir.path / "a.dot").string(),
              fixtures, &out, &err);
  REQUIRE(analyze_code == 0);
  CHECK_THAT(out, ContainsSubstring("unrestricted: 6 triples, precision 0.8000"));
  CHECK_THAT(out, ContainsSubstring("<= 4: 4 triples, precision 1.0000"));
}

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

#ifndef CADSCRIPT_DEFAULT_DOCS
#define CADSCRIPT_DEFAULT_DOCS "docs/operations.md"
#endif
#ifndef CADSCRIPT_DEFAULT_PROMPTS
#define CADSCRIPT_DEFAULT_PROMPTS "prompts"
#endif

namespace fs = std::filesystem;
using namespace cadscript;
using namespace cadscript::cli;

namespace {

template <typename T>
void assign_optional(std::optional<T>& target, const std::string& value) {
  if (!value.empty()) target = T(value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cadscript: parse, normalize, interpret and evaluate CAD programs"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config (falls back to $CADSCRIPT_CONFIG)");

  Io io{std::cout, std::cerr};
  int code = kExitOk;

  // parse
  ParseArgs parse_args;
  std::string dialect = "raw";
  auto* parse_cmd = app.add_subcommand("parse", "Parse a program and print it back (or its AST as JSON)");
  parse_cmd->add_option("input", parse_args.input, "Program file")->required()->check(CLI::ExistingFile);
  parse_cmd->add_option("--dialect", dialect, "raw or canonical")->check(CLI::IsMember({"raw", "canonical"}));
  parse_cmd->add_flag("--json", parse_args.json, "Print the AST as JSON");

  // normalize
  NormalizeArgs norm_args;
  std::string norm_out, norm_reject;
  auto* norm_cmd = app.add_subcommand("normalize", "Normalize a program or a directory of programs");
  norm_cmd->add_option("input", norm_args.input, "Program file or directory")->required();
  norm_cmd->add_option("-o,--out", norm_out, "Output file, or directory for a directory input");
  norm_cmd->add_option("--reject-dir", norm_reject, "Where rejected programs go (default OUT/rejected)");
  norm_cmd->add_flag("--report", norm_args.report, "Write per-program pass reports");
  norm_cmd->add_flag("--skip-validation", norm_args.skip_validation, "Do not check equivalence");

  // validate
  ValidateArgs val_args;
  auto* val_cmd = app.add_subcommand("validate", "Check that a canonical program matches its raw source");
  val_cmd->add_option("raw", val_args.raw, "Raw program")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("canonical", val_args.canonical, "Canonical program")->required()->check(CLI::ExistingFile);

  // interpret
  InterpretArgs interp_args;
  std::string stl_out, obj_out;
  auto* interp_cmd = app.add_subcommand("interpret", "Build the mesh of a sketch-and-extrude program");
  interp_cmd->add_option("input", interp_args.input, "Program file")->required()->check(CLI::ExistingFile);
  interp_cmd->add_option("--stl", stl_out, "Write the merged mesh as ASCII STL");
  interp_cmd->add_option("--obj", obj_out, "Write the merged mesh as OBJ");

  // sample
  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "Sample surface points with normals");
  sample_cmd->add_option("input", sample_args.input, ".obj, .stl or .fs file")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("-o,--out", sample_args.output, "Output .xyz file")->required();
  sample_cmd->add_option("-n,--points", sample_args.n, "Number of points")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample_args.seed, "Random seed");
  sample_cmd->add_flag("--unit", sample_args.unit, "Scale into the unit cube first");

  // eval
  EvalArgs eval_args;
  std::string eval_json, eval_csv;
  std::optional<std::uint64_t> eval_seed;
  std::optional<unsigned> eval_threads;
  auto* eval_cmd = app.add_subcommand("eval", "Compare generated shapes against references, paired by file stem");
  eval_cmd->add_option("ref_dir", eval_args.ref_dir, "Reference shapes")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("gen_dir", eval_args.gen_dir, "Generated shapes")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--json", eval_json, "Write the full report as JSON");
  eval_cmd->add_option("--csv", eval_csv, "Write per-pair metrics as CSV");
  eval_cmd->add_option("--seed", eval_seed, "Override the protocol seed");
  eval_cmd->add_option("--threads", eval_threads, "Worker threads (results do not depend on it)");

  // stats
  StatsArgs stats_args;
  std::string match_target, split;
  auto* stats_cmd = app.add_subcommand("stats", "Operation and primitive counts of a corpus");
  stats_cmd->add_option("input", stats_args.input, "manifest.json or directory of programs")->required()
      ->check(CLI::ExistingPath);
  stats_cmd->add_option("--match-distribution", match_target, "Target fractions JSON");
  stats_cmd->add_option("--count", stats_args.match_count, "Programs to select (default: all)");
  stats_cmd->add_option("--split", split, "Only this manifest split")->check(CLI::IsMember({"train", "test"}));

  // annotate
  AnnotateArgs ann_args;
  std::string replay, record, fewshot;
  std::optional<int> retries;
  std::optional<unsigned> parallel;
  ann_args.docs = CADSCRIPT_DEFAULT_DOCS;
  ann_args.annotator_prompt = fs::path(CADSCRIPT_DEFAULT_PROMPTS) / "annotator_v1.txt";
  ann_args.reviewer_prompt = fs::path(CADSCRIPT_DEFAULT_PROMPTS) / "reviewer_v1.txt";
  auto* ann_cmd = app.add_subcommand("annotate", "Describe canonical programs with an annotator and a reviewer");
  ann_cmd->add_option("input", ann_args.input, "manifest.json, directory or canonical program")->required()
      ->check(CLI::ExistingPath);
  ann_cmd->add_option("-o,--out", ann_args.output, "Output JSONL")->required();
  ann_cmd->add_option("--client", ann_args.client, "mock, http or replay")
      ->check(CLI::IsMember({"mock", "http", "replay"}));
  ann_cmd->add_option("--replay", replay, "Recorded responses for --client replay");
  ann_cmd->add_option("--record", record, "Record every response to this JSONL file");
  ann_cmd->add_option("--fewshot", fewshot, "Few-shot examples JSONL ({code, description} per line)");
  ann_cmd->add_option("--docs", ann_args.docs, "Operation documentation markdown");
  ann_cmd->add_option("--annotator-prompt", ann_args.annotator_prompt, "Annotator system prompt");
  ann_cmd->add_option("--reviewer-prompt", ann_args.reviewer_prompt, "Reviewer system prompt");
  ann_cmd->add_option("--retries", retries, "Extra attempts per stage after a failure");
  ann_cmd->add_option("--parallel", parallel, "Programs in flight at once");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    Config config = Config::resolve(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
    if (parse_cmd->parsed()) {
      parse_args.dialect = dialect == "canonical" ? Dialect::Canonical : Dialect::Raw;
      code = cmd_parse(parse_args, io);
    } else if (norm_cmd->parsed()) {
      assign_optional(norm_args.output, norm_out);
      assign_optional(norm_args.reject_dir, norm_reject);
      norm_args.config = config;
      code = cmd_normalize(norm_args, io);
    } else if (val_cmd->parsed()) {
      val_args.options = config.validation;
      code = cmd_validate(val_args, io);
    } else if (interp_cmd->parsed()) {
      assign_optional(interp_args.stl, stl_out);
      assign_optional(interp_args.obj, obj_out);
      code = cmd_interpret(interp_args, io);
    } else if (sample_cmd->parsed()) {
      code = cmd_sample(sample_args, io);
    } else if (eval_cmd->parsed()) {
      eval_args.protocol = config.eval;
      if (eval_seed) eval_args.protocol.seed = *eval_seed;
      if (eval_threads) eval_args.protocol.threads = *eval_threads;
      assign_optional(eval_args.out_json, eval_json);
      assign_optional(eval_args.out_csv, eval_csv);
      code = cmd_eval(eval_args, io);
    } else if (stats_cmd->parsed()) {
      assign_optional(stats_args.match_target, match_target);
      assign_optional(stats_args.split, split);
      code = cmd_stats(stats_args, io);
    } else if (ann_cmd->parsed()) {
      assign_optional(ann_args.replay, replay);
      assign_optional(ann_args.record, record);
      assign_optional(ann_args.fewshot, fewshot);
      ann_args.config = config;
      if (retries) ann_args.config.annotate_retries = *retries;
      if (parallel) ann_args.config.annotate_parallelism = *parallel;
      code = cmd_annotate(ann_args, io);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return code;
}

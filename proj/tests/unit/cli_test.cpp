#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "cadscript/geom/interpret.hpp"
#include "commands.hpp"
#include "manifest.hpp"
#include "test_support.hpp"

using namespace cadscript;
using namespace cadscript::cli;
namespace fs = std::filesystem;
using testing_support::corpus_dir;
using testing_support::corpus_files;
using testing_support::read_file;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("cadscript_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Captured {
  std::ostringstream out;
  std::ostringstream err;
  Io io() { return {out, err}; }
};

// The first ten sketch-and-extrude programs of the corpus.
std::vector<fs::path> ten_programs() {
  std::vector<fs::path> out;
  for (const auto& p : corpus_files("canonical")) {
    if (p.filename().string()[0] == 's' && out.size() < 10) out.push_back(p);
  }
  return out;
}

void copy_into(const std::vector<fs::path>& files, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& f : files) fs::copy_file(f, dir / f.filename());
}

metrics::EvalProtocol small_protocol() {
  metrics::EvalProtocol p;
  p.points_accuracy = 1500;
  p.points_distribution = 300;
  p.repeats = 2;
  p.seed = 7;
  return p;
}

}  // namespace

TEST(Config, SectionsAndUnknownKeys) {
  auto c = Config::from_json(nlohmann::json::parse(
      R"({"normalize": {"precision_decimals": 3}, "eval": {"seed": 9}, "annotate": {"retries": 1}})"));
  EXPECT_EQ(c.normalize.precision_decimals, 3);
  EXPECT_EQ(c.eval.seed, 9u);
  EXPECT_EQ(c.annotate_retries, 1);
  EXPECT_THROW(Config::from_json(nlohmann::json::parse(R"({"colour": 1})")), std::invalid_argument);
  EXPECT_THROW(Config::from_json(nlohmann::json::parse(R"({"annotate": {"speed": 1}})")), std::invalid_argument);
}

TEST(Config, EnvironmentFallback) {
  TempDir dir("config");
  write_text(dir.path() / "c.json", R"({"validation": {"tolerance": 0.5}})");
  ::setenv("CADSCRIPT_CONFIG", (dir.path() / "c.json").c_str(), 1);
  Config c = Config::resolve(std::nullopt);
  ::unsetenv("CADSCRIPT_CONFIG");
  EXPECT_DOUBLE_EQ(c.validation.tolerance, 0.5);
  EXPECT_DOUBLE_EQ(Config::resolve(std::nullopt).validation.tolerance, 1e-6);
}

TEST(CmdParse, EchoesCanonicalAndLocatesErrors) {
  const auto file = corpus_dir() / "canonical" / "s01_box.fs";
  Captured c;
  EXPECT_EQ(cmd_parse({file, Dialect::Canonical, false}, c.io()), kExitOk);
  EXPECT_EQ(c.out.str(), read_file(file));

  TempDir dir("parse");
  write_text(dir.path() / "bad.fs", "newSketch(F0, entities = {\n    line(S0, start = (0, 0));\n");
  Captured bad;
  EXPECT_EQ(cmd_parse({dir.path() / "bad.fs", Dialect::Raw, false}, bad.io()), kExitInput);
  EXPECT_NE(bad.err.str().find("bad.fs:"), std::string::npos);
}

TEST(CmdNormalize, DirectoryMatchesGoldens) {
  TempDir dir("normalize");
  NormalizeArgs args;
  args.input = corpus_dir() / "raw";
  args.output = dir.path() / "out";
  args.report = true;
  Captured c;
  ASSERT_EQ(cmd_normalize(args, c.io()), kExitOk) << c.err.str();
  auto summary = nlohmann::json::parse(c.out.str());
  EXPECT_EQ(summary["rejected"], 0);
  EXPECT_EQ(summary["processed"], corpus_files("raw").size());
  for (const auto& golden : corpus_files("canonical")) {
    EXPECT_EQ(read_file(dir.path() / "out" / golden.filename()), read_file(golden)) << golden;
    auto report = nlohmann::json::parse(read_file(dir.path() / "out" / (golden.stem().string() + ".report.json")));
    EXPECT_EQ(report["passes"].size(), default_pass_order().size());
    EXPECT_NE(report["validation"]["status"], "failed");
  }
}

TEST(CmdNormalize, BrokenProgramsAreRejected) {
  TempDir dir("reject");
  copy_into(corpus_files("broken"), dir.path() / "in");
  fs::copy_file(corpus_dir() / "raw" / "s01_box.fs", dir.path() / "in" / "s01_box.fs");
  NormalizeArgs args;
  args.input = dir.path() / "in";
  args.output = dir.path() / "out";
  Captured c;
  EXPECT_EQ(cmd_normalize(args, c.io()), kExitFailure);
  auto summary = nlohmann::json::parse(c.out.str());
  EXPECT_EQ(summary["processed"], 3);
  EXPECT_EQ(summary["rejected"], 2);
  EXPECT_NEAR(summary["discard_rate"].get<double>(), 2.0 / 3.0, 1e-15);
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "s01_box.fs"));
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "rejected" / "bowtie.fs"));
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "rejected" / "open_profile.reason.json"));
  EXPECT_TRUE(fs::exists(dir.path() / "in" / "bowtie.fs"));  // copied, not moved
}

TEST(CmdValidate, ExitCodes) {
  Captured ok;
  EXPECT_EQ(cmd_validate({corpus_dir() / "raw" / "s02_plate_inches.fs",
                          corpus_dir() / "canonical" / "s02_plate_inches.fs", {}},
                         ok.io()),
            kExitOk);
  EXPECT_EQ(nlohmann::json::parse(ok.out.str())["status"], "verified-geometric");
  Captured mismatch;
  EXPECT_EQ(cmd_validate({corpus_dir() / "raw" / "s02_plate_inches.fs", corpus_dir() / "canonical" / "s01_box.fs", {}},
                         mismatch.io()),
            kExitFailure);
}

TEST(CmdInterpret, ReportsVolumeAndWritesMesh) {
  TempDir dir("interpret");
  InterpretArgs args{corpus_dir() / "canonical" / "s01_box.fs", dir.path() / "box.stl", dir.path() / "box.obj"};
  Captured c;
  ASSERT_EQ(cmd_interpret(args, c.io()), kExitOk);
  auto j = nlohmann::json::parse(c.out.str());
  EXPECT_NEAR(j["bodies"][0]["volume"].get<double>(), 40.0 * 20.0 * 10.0, 1e-9);
  EXPECT_TRUE(j["bodies"][0]["watertight"].get<bool>());
  EXPECT_NEAR(geom::mesh_volume(geom::read_stl(read_file(dir.path() / "box.stl"))), 8000.0, 1e-6);
  EXPECT_NEAR(geom::mesh_volume(geom::read_obj(read_file(dir.path() / "box.obj"))), 8000.0, 1e-9);

  Captured broken;
  EXPECT_EQ(cmd_interpret({corpus_dir() / "broken" / "bowtie.fs", {}, {}}, broken.io()), kExitFailure);
  EXPECT_EQ(nlohmann::json::parse(broken.out.str())["reason"], "self-intersecting-profile");
}

TEST(CmdSample, WritesRequestedPointCount) {
  TempDir dir("sample");
  SampleArgs args;
  args.input = corpus_dir() / "canonical" / "s03_disc.fs";
  args.output = dir.path() / "disc.xyz";
  args.n = 321;
  args.seed = 4;
  Captured c;
  ASSERT_EQ(cmd_sample(args, c.io()), kExitOk);
  auto cloud = metrics::read_xyz(read_file(args.output));
  EXPECT_EQ(cloud.size(), 321u);
  Captured again;
  args.output = dir.path() / "again.xyz";
  ASSERT_EQ(cmd_sample(args, again.io()), kExitOk);
  EXPECT_EQ(read_file(dir.path() / "disc.xyz"), read_file(args.output));
}

TEST(CmdStats, HandTallyOfTenPrograms) {
  TempDir dir("stats");
  copy_into(ten_programs(), dir.path());
  Captured c;
  ASSERT_EQ(cmd_stats({dir.path(), {}, 0, {}}, c.io()), kExitOk);
  auto j = nlohmann::json::parse(c.out.str());
  // Tallied by reading s01..s10.
  EXPECT_EQ(j["programs"], 10);
  EXPECT_EQ(j["features"], 24);
  EXPECT_EQ(j["operations"]["Sketch"]["count"], 11);
  EXPECT_EQ(j["operations"]["Extrude"]["count"], 11);
  EXPECT_EQ(j["operations"]["Boolean"]["count"], 1);
  EXPECT_EQ(j["operations"]["ConstructionPlane"]["count"], 1);
  EXPECT_EQ(j["operations"]["Fillet"]["count"], 0);
  EXPECT_DOUBLE_EQ(j["operations"]["Sketch"]["fraction"].get<double>(), 11.0 / 24.0);
  EXPECT_EQ(j["primitives"]["line"], 22);
  EXPECT_EQ(j["primitives"]["circle"], 6);
  EXPECT_EQ(j["primitives"]["arc"], 3);
  EXPECT_EQ(j["primitives"]["spline"], 0);
}

TEST(CmdStats, ManifestSplitAndMatching) {
  TempDir dir("match");
  write_text(dir.path() / "target.json", R"({"fractions": {"newSketch": 0.5, "Extrude": 0.5}})");
  StatsArgs args{corpus_dir() / "manifest.json", dir.path() / "target.json", 1, {}};
  Captured c;
  ASSERT_EQ(cmd_stats(args, c.io()), kExitOk) << c.err.str();
  auto j = nlohmann::json::parse(c.out.str());
  EXPECT_EQ(j["programs"], 32);  // broken entries are skipped
  EXPECT_EQ(j["match"]["ids"][0], "s01_box");
  EXPECT_DOUBLE_EQ(j["match"]["l1"].get<double>(), 0.0);
  EXPECT_EQ(j["match"]["method"], "greedy L1 (approximation)");
}

TEST(MatchDistribution, GreedyPrefersCloserMix) {
  auto p = [](const std::string& text) { return parse(text, Dialect::Raw); };
  std::vector<std::pair<std::string, Program>> candidates = {
      {"plane_only", p("opPlane(a, base = XY);")},
      {"mirror", p("opPlane(a, base = XY);\nopMirror(mr, entities = [], plane = XY);")},
  };
  std::map<OpKind, double> target;
  target[OpKind::ConstructionPlane] = 0.5;
  target[OpKind::Mirror] = 0.5;
  auto r = match_distribution(candidates, target, 1);
  EXPECT_EQ(r.ids, std::vector<std::string>{"mirror"});
  EXPECT_DOUBLE_EQ(r.l1, 0.0);
  EXPECT_THROW(match_distribution(candidates, target, 3), std::invalid_argument);
}

TEST(Manifest, FlagsAndErrors) {
  TempDir dir("manifest");
  auto j = nlohmann::json::parse(R"({"version": 1, "entries": [{"id": "a", "raw": "nowhere.fs"}]})");
  Manifest m = Manifest::from_json(j, dir.path());
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_TRUE(m.entries[0].has_flag("missing"));
  auto dup = nlohmann::json::parse(R"({"entries": [{"id": "a", "raw": "x"}, {"id": "a", "raw": "y"}]})");
  EXPECT_THROW(Manifest::from_json(dup, dir.path()), std::invalid_argument);
  auto unknown = nlohmann::json::parse(R"({"entries": [{"id": "a", "raw": "x", "note": 1}]})");
  EXPECT_THROW(Manifest::from_json(unknown, dir.path()), std::invalid_argument);

  Manifest corpus = Manifest::load(corpus_dir() / "manifest.json");
  for (const auto& e : corpus.entries) EXPECT_FALSE(e.has_flag("missing")) << e.id;
  EXPECT_EQ(Manifest::from_json(nlohmann::json::parse(corpus.to_json().dump()), corpus.base_dir).to_json(),
            corpus.to_json());
}

TEST(CmdEval, IdentitySuiteAndDeterminism) {
  TempDir dir("eval");
  auto files = ten_programs();
  files.resize(4);
  copy_into(files, dir.path() / "shapes");
  EvalArgs args{dir.path() / "shapes", dir.path() / "shapes", small_protocol(), dir.path() / "a.json",
                dir.path() / "a.csv"};
  Captured first;
  ASSERT_EQ(cmd_eval(args, first.io()), kExitOk) << first.err.str();
  auto j = nlohmann::json::parse(read_file(dir.path() / "a.json"));
  EXPECT_EQ(j["cd_median"].get<double>(), 0.0);
  EXPECT_EQ(j["nc_median"].get<double>(), 1.0);
  EXPECT_EQ(j["cov_pct"].get<double>(), 100.0);
  EXPECT_EQ(j["mmd"].get<double>(), 0.0);
  EXPECT_EQ(j["jsd"].get<double>(), 0.0);
  EXPECT_EQ(j["ir_pct"].get<double>(), 0.0);

  args.out_json = dir.path() / "b.json";
  args.out_csv = dir.path() / "b.csv";
  args.protocol.threads = 3;
  Captured second;
  ASSERT_EQ(cmd_eval(args, second.io()), kExitOk);
  EXPECT_EQ(first.out.str(), second.out.str());
  EXPECT_EQ(read_file(dir.path() / "b.csv"), read_file(dir.path() / "a.csv"));
  // The protocol block records the thread count; everything else must agree.
  auto a = nlohmann::json::parse(read_file(dir.path() / "a.json"));
  auto b = nlohmann::json::parse(read_file(dir.path() / "b.json"));
  a.erase("protocol");
  b.erase("protocol");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(CmdEval, InvalidGenerationsAndMissingReferences) {
  TempDir dir("eval_invalid");
  auto files = ten_programs();
  files.resize(3);
  copy_into(files, dir.path() / "ref");
  copy_into({files[0], files[1]}, dir.path() / "gen");
  fs::copy_file(corpus_dir() / "broken" / "bowtie.fs", dir.path() / "gen" / files[2].filename());
  Captured c;
  ASSERT_EQ(cmd_eval({dir.path() / "ref", dir.path() / "gen", small_protocol(), dir.path() / "r.json", {}}, c.io()),
            kExitOk)
      << c.err.str();
  auto j = nlohmann::json::parse(read_file(dir.path() / "r.json"));
  EXPECT_EQ(j["n_invalid"], 1);
  EXPECT_DOUBLE_EQ(j["ir_pct"].get<double>(), 100.0 / 3.0);

  fs::remove(dir.path() / "gen" / files[2].filename());
  Captured missing;
  EXPECT_EQ(cmd_eval({dir.path() / "ref", dir.path() / "gen", small_protocol(), {}, {}}, missing.io()), kExitInput);
}

TEST(CmdAnnotate, MockBatchOverCanonicalDirectory) {
  TempDir dir("annotate");
  copy_into(ten_programs(), dir.path() / "in");
  AnnotateArgs args;
  args.input = dir.path() / "in";
  args.output = dir.path() / "out.jsonl";
  args.record = dir.path() / "rec.jsonl";
  args.docs = fs::path(CADSCRIPT_DOCS_DIR) / "operations.md";
  args.annotator_prompt = fs::path(CADSCRIPT_PROMPTS_DIR) / "annotator_v1.txt";
  args.reviewer_prompt = fs::path(CADSCRIPT_PROMPTS_DIR) / "reviewer_v1.txt";
  Captured c;
  ASSERT_EQ(cmd_annotate(args, c.io()), kExitOk) << c.err.str();
  std::istringstream lines(read_file(args.output));
  std::string line;
  std::vector<std::string> ids;
  while (std::getline(lines, line)) ids.push_back(nlohmann::json::parse(line)["id"]);
  ASSERT_EQ(ids.size(), 10u);
  EXPECT_EQ(ids.front(), "s01_box");

  // Replaying the recording reproduces the output without the mock.
  AnnotateArgs replay = args;
  replay.client = "replay";
  replay.replay = dir.path() / "rec.jsonl";
  replay.record.reset();
  replay.output = dir.path() / "replayed.jsonl";
  Captured r;
  ASSERT_EQ(cmd_annotate(replay, r.io()), kExitOk) << r.err.str();
  EXPECT_EQ(read_file(replay.output), read_file(args.output));

  AnnotateArgs raw = args;
  raw.input = corpus_dir() / "raw" / "s02_plate_inches.fs";
  Captured rejected;
  EXPECT_EQ(cmd_annotate(raw, rejected.io()), kExitInput);
}

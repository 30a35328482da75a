#include <gtest/gtest.h>

#include <chrono>
#include <regex>

#include "cadscript/analysis.hpp"
#include "cadscript/normalize.hpp"
#include "cadscript/parser.hpp"
#include "cadscript/validate.hpp"
#include "test_support.hpp"

using namespace cadscript;
using testing_support::corpus_dir;
using testing_support::corpus_files;
using testing_support::read_file;

namespace {

// Programs whose every feature is in the interpreter's subset start with "s".
bool is_sketch_extrude(const std::filesystem::path& path) { return path.filename().string()[0] == 's'; }

}  // namespace

TEST(Corpus, RawAndCanonicalPair) {
  auto raw = corpus_files("raw");
  auto canonical = corpus_files("canonical");
  ASSERT_EQ(raw.size(), canonical.size());
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(raw[i].filename(), canonical[i].filename());
}

TEST(Corpus, CoversEveryOperationAndPrimitive) {
  // Keyword scan of the text, independent of the parser.
  std::set<std::string> ops, prims;
  std::regex op_re(R"(^(newSketch|op[A-Za-z]+)\()");
  std::regex prim_re(R"(^\s+(line|circle|arc|ellipse|ellipticalArc|bezier|spline|text)\()");
  for (const auto& path : corpus_files("canonical")) {
    std::istringstream in(read_file(path));
    std::string line;
    std::smatch m;
    while (std::getline(in, line)) {
      if (std::regex_search(line, m, op_re)) ops.insert(m[1]);
      if (std::regex_search(line, m, prim_re)) prims.insert(m[1]);
    }
  }
  EXPECT_EQ(ops.size(), 15u);
  EXPECT_EQ(prims.size(), 8u);
  for (OpKind k : all_op_kinds()) EXPECT_EQ(ops.count(std::string(op_keyword(k))), 1u) << op_keyword(k);
}

TEST(Corpus, GoldenNormalization) {
  for (const auto& path : corpus_files("raw")) {
    Program raw = parse(read_file(path), Dialect::Raw, path.filename().string());
    std::string golden = read_file(corpus_dir() / "canonical" / path.filename());
    EXPECT_EQ(emit(normalize(raw).program), golden) << path;
  }
}

TEST(Corpus, NormalizeIsAFixedPoint) {
  for (const auto& path : corpus_files("raw")) {
    Program once = normalize(parse(read_file(path), Dialect::Raw)).program;
    EXPECT_EQ(normalize(once).program, once) << path;
    for (const auto& name : default_pass_order()) {
      Program a = run_pass(name, once, PassConfig{});
      EXPECT_EQ(run_pass(name, a, PassConfig{}), a) << path << " " << name;
    }
  }
}

TEST(Corpus, EveryPassIsIdempotentOnRawInput) {
  for (const auto& path : corpus_files("raw")) {
    Program p = parse(read_file(path), Dialect::Raw);
    for (const auto& name : default_pass_order()) {
      Program a = run_pass(name, p, PassConfig{});
      EXPECT_EQ(run_pass(name, a, PassConfig{}), a) << path << " " << name;
      p = a;
    }
  }
}

TEST(Corpus, ValidationVerdicts) {
  for (const auto& path : corpus_files("raw")) {
    Program raw = parse(read_file(path), Dialect::Raw);
    Program canonical = parse(read_file(corpus_dir() / "canonical" / path.filename()), Dialect::Canonical);
    ValidationResult v = validate_equivalence(raw, canonical);
    if (is_sketch_extrude(path)) {
      ASSERT_EQ(v.status, ValidationResult::Status::VerifiedGeometric) << path << ": " << v.reason;
      EXPECT_LE(*v.chamfer_to_original, 1e-6) << path;
    } else {
      EXPECT_EQ(v.status, ValidationResult::Status::VerifiedStructural) << path << ": " << v.reason;
    }
  }
}

TEST(Corpus, BrokenProgramsFail) {
  auto broken = corpus_files("broken");
  ASSERT_EQ(broken.size(), 2u);
  for (const auto& path : broken) {
    Program raw = parse(read_file(path), Dialect::Raw);
    ValidationResult v = validate_equivalence(raw, normalize(raw).program);
    EXPECT_EQ(v.status, ValidationResult::Status::Failed) << path;
  }
}

TEST(Corpus, HubExampleQueries) {
  const auto path = corpus_dir() / "raw" / "x01_hub_lugs.fs";
  const std::string text = read_file(path);
  Program p = parse(text, Dialect::Raw);
  std::set<OpKind> kinds;
  for (const auto& f : p.features) kinds.insert(f.kind);
  for (OpKind k : {OpKind::Fillet, OpKind::CircularPattern, OpKind::Loft, OpKind::DeleteBody}) {
    EXPECT_EQ(kinds.count(k), 1u) << to_string(k);
  }
  EXPECT_GE(p.features.size(), 6u);

  // Oracle: every makeQuery(<op>, ...) in the text, nested ones included.
  std::multiset<std::string> expected;
  std::regex re(R"(makeQuery\(([A-Za-z_][A-Za-z0-9_]*),)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    expected.insert((*it)[1]);
  }
  std::multiset<std::string> seen;
  for (const auto& f : p.features) {
    for_each_query(f, [&](const Query& q) { seen.insert(q.op_id.text()); });
  }
  EXPECT_EQ(seen, expected);
  EXPECT_EQ(expected.size(), 10u);
}

TEST(Corpus, RoundTripUnderFiveSeconds) {
  auto start = std::chrono::steady_clock::now();
  for (const auto& path : corpus_files("canonical")) {
    std::string text = read_file(path);
    EXPECT_EQ(emit(parse(text, Dialect::Canonical)), text);
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
}

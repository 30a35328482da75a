#pragma once

// Subcommand implementations. Each returns the process exit code:
// 0 success, 1 input error, 2 validation or construction failure.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadscript/metrics/metrics.hpp"
#include "cadscript/normalize.hpp"
#include "cadscript/parser.hpp"
#include "cadscript/validate.hpp"

namespace cadscript::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitFailure = 2;

// Settings shared by the commands, read from --config or $CADSCRIPT_CONFIG.
// Sections: "normalize" (pass config), "validation", "eval" (protocol),
// "annotate". Every section and key is optional; unknown keys are errors.
struct Config {
  PassConfig normalize;
  ValidationOptions validation;
  metrics::EvalProtocol eval;
  int annotate_retries = 3;
  unsigned annotate_parallelism = 4;

  static Config from_json(const nlohmann::json& j);
  static Config load(const std::filesystem::path& path);
  // The explicit path if given, else $CADSCRIPT_CONFIG, else defaults.
  static Config resolve(const std::optional<std::filesystem::path>& path);
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

struct ParseArgs {
  std::filesystem::path input;
  Dialect dialect = Dialect::Raw;
  bool json = false;
};
int cmd_parse(const ParseArgs& args, Io io);

struct NormalizeArgs {
  std::filesystem::path input;                 // file or directory of *.fs
  std::optional<std::filesystem::path> output; // file or directory; stdout for a single file when absent
  std::optional<std::filesystem::path> reject_dir;
  bool report = false;
  bool skip_validation = false;
  Config config;
};
int cmd_normalize(const NormalizeArgs& args, Io io);

struct ValidateArgs {
  std::filesystem::path raw;
  std::filesystem::path canonical;
  ValidationOptions options;
};
int cmd_validate(const ValidateArgs& args, Io io);

struct InterpretArgs {
  std::filesystem::path input;
  std::optional<std::filesystem::path> stl;
  std::optional<std::filesystem::path> obj;
};
int cmd_interpret(const InterpretArgs& args, Io io);

struct SampleArgs {
  std::filesystem::path input;  // .obj, .stl or .fs
  std::filesystem::path output;
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  bool unit = false;  // scale into the unit cube first
};
int cmd_sample(const SampleArgs& args, Io io);

struct EvalArgs {
  std::filesystem::path ref_dir;
  std::filesystem::path gen_dir;
  metrics::EvalProtocol protocol;
  std::optional<std::filesystem::path> out_json;
  std::optional<std::filesystem::path> out_csv;
};
int cmd_eval(const EvalArgs& args, Io io);

struct StatsArgs {
  std::filesystem::path input;  // manifest.json or directory of *.fs
  std::optional<std::filesystem::path> match_target;
  std::size_t match_count = 0;
  std::optional<std::string> split;  // "train" / "test" filter for manifests
};
int cmd_stats(const StatsArgs& args, Io io);

struct AnnotateArgs {
  std::filesystem::path input;  // manifest.json, directory of canonical *.fs, or one file
  std::filesystem::path output; // JSONL
  std::string client = "mock";  // mock | http | replay
  std::optional<std::filesystem::path> replay;
  std::optional<std::filesystem::path> record;
  std::optional<std::filesystem::path> fewshot;
  std::filesystem::path docs;
  std::filesystem::path annotator_prompt;
  std::filesystem::path reviewer_prompt;
  Config config;
};
int cmd_annotate(const AnnotateArgs& args, Io io);

// Helpers shared with tests.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Parses as Raw (a superset of Canonical) and lowers units, expressions and
// implicit sketch parameters so the interpreter can run it.
Program load_lowered_program(const std::filesystem::path& path);

// .obj, .stl, or a program (.fs) interpreted to a single merged mesh.
geom::Mesh load_mesh(const std::filesystem::path& path);

// Shape files of a directory keyed by stem; duplicate stems are an error.
std::map<std::string, std::filesystem::path> shape_files(const std::filesystem::path& dir);

}  // namespace cadscript::cli

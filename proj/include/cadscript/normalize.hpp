#pragma once

// Source-to-source normalization of design histories. Each pass is a pure
// function Program -> Program; `normalize` chains them and records what
// every pass touched.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadscript/analysis.hpp"
#include "cadscript/ast.hpp"

namespace cadscript {

inline constexpr const char* kExplicitSketchParams = "explicit_sketch_params";
inline constexpr const char* kStandardizeUnits = "standardize_units";
inline constexpr const char* kFoldNumericExpressions = "fold_numeric_expressions";
inline constexpr const char* kSimplifyOperations = "simplify_operations";
inline constexpr const char* kEliminateDeadCode = "eliminate_dead_code";
inline constexpr const char* kRenameIdentifiers = "rename_identifiers";
inline constexpr const char* kCanonicalizeQueries = "canonicalize_queries";
inline constexpr const char* kRoundPrecision = "round_precision";

const std::vector<std::string>& default_pass_order();

struct PassConfig {
  int precision_decimals = 2;
  std::string canonical_length_unit = "mm";
  std::string canonical_angle_unit = "deg";
  std::vector<std::string> enabled_passes = default_pass_order();

  // Throws std::invalid_argument on negative precision, unknown or repeated
  // pass names, or units other than mm/deg.
  void check() const;

  static PassConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

class PassError : public std::runtime_error {
 public:
  PassError(std::string pass, std::string message, std::optional<SourcePos> pos = std::nullopt);

  const std::string& pass() const { return pass_; }
  const std::string& message() const { return message_; }
  const std::optional<SourcePos>& pos() const { return pos_; }

 private:
  std::string pass_;
  std::string message_;
  std::optional<SourcePos> pos_;
};

struct PassEntry {
  std::string name;
  std::size_t features_changed = 0;
  std::size_t entities_removed = 0;  // features plus sketch entities
  std::map<std::string, std::string> identifiers_renamed;  // changed ids only
  std::vector<std::string> notes;
  std::vector<Diagnostic> diagnostics;
};

struct PassReport {
  std::string source_name;
  std::vector<PassEntry> passes;

  const PassEntry* find(std::string_view name) const;
  nlohmann::ordered_json to_json() const;
};

// Evaluates a scalar to its value in canonical units (mm, deg). Unit words
// multiply by their conversion factor. Throws PassError(pass) on division
// by zero or a unit of the wrong dimension.
Decimal evaluate_scalar(const Scalar& scalar, const std::string& pass);

Program explicit_sketch_params(const Program& program, PassEntry* entry = nullptr);
Program standardize_units(const Program& program, PassEntry* entry = nullptr);
Program fold_numeric_expressions(const Program& program, PassEntry* entry = nullptr);
Program simplify_operations(const Program& program, PassEntry* entry = nullptr);
Program eliminate_dead_code(const Program& program, PassEntry* entry = nullptr);

struct RenameResult {
  Program program;
  std::map<Identifier, Identifier> mapping;  // total over old identifiers
};
RenameResult rename_identifiers(const Program& program, PassEntry* entry = nullptr);

Program canonicalize_queries(const Program& program, PassEntry* entry = nullptr);
Program round_precision(const Program& program, int decimals, PassEntry* entry = nullptr);

// Runs one pass by name with the given config.
Program run_pass(const std::string& name, const Program& program, const PassConfig& config,
                 PassEntry* entry = nullptr);

struct NormalizeResult {
  Program program;
  PassReport report;
};

// Runs the enabled passes in order and checks that the result emits text
// that parses under the canonical dialect. Throws PassError naming the
// failing pass.
NormalizeResult normalize(const Program& program, const PassConfig& config = {});

}  // namespace cadscript

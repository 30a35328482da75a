#include "cadscript/normalize.hpp"

#include <algorithm>

#include "cadscript/parser.hpp"

namespace cadscript {

Program run_pass(const std::string& name, const Program& program, const PassConfig& config,
                 PassEntry* entry) {
  try {
    if (name == kExplicitSketchParams) return explicit_sketch_params(program, entry);
    if (name == kStandardizeUnits) return standardize_units(program, entry);
    if (name == kFoldNumericExpressions) return fold_numeric_expressions(program, entry);
    if (name == kSimplifyOperations) return simplify_operations(program, entry);
    if (name == kEliminateDeadCode) return eliminate_dead_code(program, entry);
    if (name == kRenameIdentifiers) return rename_identifiers(program, entry).program;
    if (name == kCanonicalizeQueries) return canonicalize_queries(program, entry);
    if (name == kRoundPrecision) return round_precision(program, config.precision_decimals, entry);
  } catch (const PassError&) {
    throw;
  } catch (const std::exception& e) {
    throw PassError(name, e.what());
  }
  throw std::invalid_argument("unknown pass '" + name + "'");
}

NormalizeResult normalize(const Program& program, const PassConfig& config) {
  config.check();
  NormalizeResult result;
  result.report.source_name = program.source_name;

  for (const auto& d : validate_structure(program)) {
    if (d.severity == Severity::Error) {
      throw PassError("validate_structure", d.feature_id.text() + ": " + d.message);
    }
  }

  Program current = program;
  for (const auto& name : config.enabled_passes) {
    PassEntry entry;
    entry.name = name;
    current = run_pass(name, current, config, &entry);
    result.report.passes.push_back(std::move(entry));
  }

  // Only the full pipeline promises canonical output; a subset must still
  // emit something the raw grammar reads back.
  std::vector<std::string> all = default_pass_order();
  std::vector<std::string> enabled = config.enabled_passes;
  std::sort(all.begin(), all.end());
  std::sort(enabled.begin(), enabled.end());
  bool full = std::includes(enabled.begin(), enabled.end(), all.begin(), all.end());
  std::string text = emit(current);
  try {
    parse(text, full ? Dialect::Canonical : Dialect::Raw, current.source_name);
  } catch (const ParseError& e) {
    throw PassError("emit_check", std::string("result is not canonical: ") + e.what());
  }
  result.program = std::move(current);
  return result;
}

}  // namespace cadscript

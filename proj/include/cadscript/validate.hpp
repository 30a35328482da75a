#pragma once

// Equivalence check between a raw program and its normalized form.
//
// Geometric mode: the raw program is lowered (explicit sketch parameters,
// millimeters/degrees, folded literals) and rounded to the configured
// precision; both it and the normalized program are interpreted, and the
// surfaces are compared by a sampled point-to-surface chamfer distance,
// relative to the reference bounding-box diagonal.
//
// Structural mode, used when the raw program leaves the interpreter's
// subset: the multisets of features with identifiers erased must match.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "cadscript/ast.hpp"

namespace cadscript {

struct ValidationOptions {
  double tolerance = 1e-6;
  int decimals = 2;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
};

struct ValidationResult {
  enum class Status { VerifiedGeometric, VerifiedStructural, Failed };

  Status status = Status::Failed;
  std::optional<double> chamfer_to_original;  // relative; geometric mode only
  std::string reason;

  bool verified() const { return status != Status::Failed; }
  nlohmann::ordered_json to_json() const;
};

std::string_view to_string(ValidationResult::Status status);  // "verified-geometric", ...

ValidationResult validate_equivalence(const Program& raw, const Program& normalized,
                                      const ValidationOptions& options = {});

// Sorted, identifier-free text of each feature; equal multisets mean the
// programs agree up to renaming and query disambiguation.
std::vector<std::string> structural_signature(const Program& program);

}  // namespace cadscript

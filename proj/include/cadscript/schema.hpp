#pragma once

// Parameter schemas for the 15 operation kinds and the 8 sketch primitives.
// The order of ParamSpec entries is the order in which parameters are
// printed. docs/operations.md is generated from the same table (see
// `cadscript docs`).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cadscript/ast.hpp"

namespace cadscript {

enum class ValueType {
  Length,      // scalar, millimeters
  Angle,       // scalar, degrees
  Number,      // dimensionless scalar
  Bool,
  Text,
  Keyword,     // one of ParamSpec::keywords
  Query,
  QueryList,
  ProfileRef,  // Query or QueryList
  PlaneRef,    // principal-plane keyword or Query
  Point2,      // (x, y) in mm
  Direction2,  // (x, y), dimensionless
  Point3,
  Direction3,
  PointArray,  // [(x, y), ...] in mm
  SketchBody,
};

std::string_view to_string(ValueType type);

// Dimension of the scalars held by a value of this type.
Dimension scalar_dimension(ValueType type);

struct ParamSpec {
  std::string name;
  ValueType type = ValueType::Length;
  bool required = true;
  std::optional<ParamValue> default_value;
  std::vector<std::string> keywords;
  std::string doc;
};

struct FeatureSchema {
  OpKind kind;
  std::string summary;
  std::vector<ParamSpec> params;

  const ParamSpec* find(std::string_view name) const;
};

// A sketch primitive may be written in several equivalent forms. Form 0 is
// the explicit form used by canonical programs; other forms are accepted by
// the raw dialect only.
struct EntityForm {
  std::string name;
  std::vector<ParamSpec> params;

  const ParamSpec* find(std::string_view name) const;
};

struct EntitySchema {
  EntityKind kind;
  std::vector<EntityForm> forms;
};

const FeatureSchema& feature_schema(OpKind kind);
const EntitySchema& entity_schema(EntityKind kind);

// Index into entity_schema(kind).forms whose parameter names match
// `params` exactly (required ones present, nothing unknown).
std::optional<std::size_t> match_entity_form(const SketchEntity& entity);

bool value_matches(const ParamValue& value, const ParamSpec& spec);

// Human-readable problems with a parameter map against a spec list; empty
// when the map conforms.
std::vector<std::string> check_params(const Params& params,
                                      const std::vector<ParamSpec>& specs);

// Principal plane keywords accepted by PlaneRef and ConstructionPlane.
const std::vector<std::string>& principal_planes();

}  // namespace cadscript

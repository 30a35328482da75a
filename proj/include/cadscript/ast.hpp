#pragma once

// Typed design-history representation shared by the parser, the
// normalization passes, the geometry interpreter and the annotation tools.
//
// Values are plain aggregates with value semantics. Parameter maps are keyed
// by name; presentation order comes from the schema table (schema.hpp), so
// two features with the same parameters compare equal regardless of the
// order in which they were written.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cadscript/decimal.hpp"

namespace cadscript {

struct SourcePos {
  int line = 0;
  int column = 0;
};

// ---------------------------------------------------------------------------
// Identifiers

class Identifier {
 public:
  enum class Family { Feature, SketchEntity, NamedEdge, NamedVertex, Opaque };

  // Canonical identifiers match this pattern; everything else is opaque.
  static constexpr std::string_view kCanonicalPattern = "^[FSEV](0|[1-9][0-9]*)$";

  Identifier() = default;
  explicit Identifier(std::string text) : text_(std::move(text)) {}

  static Identifier feature(std::size_t index);
  static Identifier sketch_entity(std::size_t index);

  const std::string& text() const { return text_; }
  bool empty() const { return text_.empty(); }
  Family family() const;
  bool is_canonical() const { return family() != Family::Opaque; }
  // Numeric suffix of a canonical identifier.
  std::optional<std::size_t> index() const;

  friend bool operator==(const Identifier&, const Identifier&) = default;
  friend auto operator<=>(const Identifier&, const Identifier&) = default;

 private:
  std::string text_;
};

// ---------------------------------------------------------------------------
// Units and scalar expressions

enum class Dimension { Length, Angle, None };

enum class Unit { Millimeter, Centimeter, Meter, Inch, Foot, Degree, Radian };

std::optional<Unit> unit_from_word(std::string_view word);
std::string_view unit_word(Unit unit);
Dimension unit_dimension(Unit unit);
std::string_view canonical_unit_name(Dimension dim);  // "mm", "deg", ""

// Immutable arithmetic tree. Canonical programs only ever hold literals; the
// raw dialect may hold sums, products, quotients, PI and unit words.
class Expr {
 public:
  enum class Kind { Literal, Pi, Unit, Negate, Add, Sub, Mul, Div };

  Expr() : Expr(literal(Decimal(0))) {}

  static Expr literal(Decimal value, SourcePos pos = {});
  static Expr pi(SourcePos pos = {});
  static Expr unit(Unit unit, SourcePos pos = {});
  static Expr negate(Expr operand, SourcePos pos = {});
  static Expr binary(Kind kind, Expr lhs, Expr rhs, SourcePos pos = {});

  Kind kind() const;
  bool is_literal() const { return kind() == Kind::Literal; }
  const Decimal& value() const;  // Literal only
  Unit unit_kind() const;        // Unit only
  const Expr& lhs() const;       // Negate operand or binary lhs
  const Expr& rhs() const;       // binary rhs
  SourcePos pos() const;

  // Structural equality; source positions are ignored.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Scalar {
  Expr expr;
  Dimension dim = Dimension::None;

  static Scalar length(Decimal mm) { return {Expr::literal(std::move(mm)), Dimension::Length}; }
  static Scalar angle(Decimal deg) { return {Expr::literal(std::move(deg)), Dimension::Angle}; }
  static Scalar number(Decimal v) { return {Expr::literal(std::move(v)), Dimension::None}; }

  bool is_literal() const { return expr.is_literal(); }
  const Decimal& value() const { return expr.value(); }

  friend bool operator==(const Scalar&, const Scalar&) = default;
};

// ---------------------------------------------------------------------------
// Queries

enum class EntityType { Vertex, Edge, Face, Body };

std::string_view to_string(EntityType type);
std::optional<EntityType> entity_type_from_string(std::string_view text);

struct Query;

enum class DisambiguationKind { OriginalSet, Topology };

std::string_view to_string(DisambiguationKind kind);

struct Disambiguation {
  DisambiguationKind kind = DisambiguationKind::OriginalSet;
  std::vector<Query> queries;

  friend bool operator==(const Disambiguation& a, const Disambiguation& b);
};

// Reference to geometry produced by an earlier feature: operation id, the
// topological role of the target, its entity class, and optional data that
// picks among several candidates.
struct Query {
  Identifier op_id;
  std::string query_type;
  EntityType entity_type = EntityType::Body;
  std::vector<Disambiguation> disambiguation;

  friend bool operator==(const Query& a, const Query& b);
};

// ---------------------------------------------------------------------------
// Parameters

struct Vec {
  std::vector<Scalar> components;  // 2 or 3
  friend bool operator==(const Vec&, const Vec&) = default;
};

struct Text {
  std::string value;
  friend bool operator==(const Text&, const Text&) = default;
};

struct Keyword {
  std::string name;
  friend bool operator==(const Keyword&, const Keyword&) = default;
};

using QueryList = std::vector<Query>;

struct ParamValue;
struct SketchEntity;
using ParamArray = std::vector<ParamValue>;
using SketchBody = std::vector<SketchEntity>;

struct ParamValue {
  using Variant = std::variant<Scalar, Vec, bool, Text, Keyword, Query,
                               QueryList, ParamArray, SketchBody>;
  Variant value;

  ParamValue() = default;
  template <typename T>
    requires std::is_constructible_v<Variant, T&&> &&
             (!std::is_same_v<std::remove_cvref_t<T>, ParamValue>)
  ParamValue(T&& v) : value(std::forward<T>(v)) {}  // NOLINT

  template <typename T>
  bool is() const { return std::holds_alternative<T>(value); }
  template <typename T>
  const T& as() const { return std::get<T>(value); }
  template <typename T>
  T& as() { return std::get<T>(value); }

  friend bool operator==(const ParamValue& a, const ParamValue& b);
};

using Params = std::map<std::string, ParamValue, std::less<>>;

enum class EntityKind { Line, Circle, Arc, Ellipse, EllipticalArc, Bezier, Spline, Text };

inline constexpr std::size_t kEntityKindCount = 8;

std::string_view to_string(EntityKind kind);        // "Line"
std::string_view entity_keyword(EntityKind kind);   // "line"
std::optional<EntityKind> entity_kind_from_keyword(std::string_view keyword);

struct SketchEntity {
  Identifier id;
  EntityKind kind = EntityKind::Line;
  Params params;

  friend bool operator==(const SketchEntity& a, const SketchEntity& b);
};

// ---------------------------------------------------------------------------
// Features and programs

enum class OpKind {
  Sketch,
  Extrude,
  Revolve,
  Sweep,
  Loft,
  ConstructionPlane,
  Fillet,
  Chamfer,
  Shell,
  Hole,
  Boolean,
  DeleteBody,
  CircularPattern,
  Mirror,
  Transform,
};

inline constexpr std::size_t kOpKindCount = 15;

std::string_view to_string(OpKind kind);           // "Extrude"
std::string_view op_keyword(OpKind kind);          // "opExtrude"
std::optional<OpKind> op_kind_from_keyword(std::string_view keyword);
std::optional<OpKind> op_kind_from_string(std::string_view name);
const std::vector<OpKind>& all_op_kinds();

struct Feature {
  Identifier id;
  OpKind kind = OpKind::Sketch;
  Params params;

  const ParamValue* param(std::string_view name) const;
  // Sketch features only; empty for other kinds.
  const SketchBody& entities() const;
  SketchBody* mutable_entities();

  friend bool operator==(const Feature& a, const Feature& b);
};

struct Program {
  std::vector<Feature> features;
  std::string source_name;

  // Index of the feature whose id is `id`, or of the sketch that owns the
  // sketch entity `id`.
  std::optional<std::size_t> owner_index(const Identifier& id) const;
  const Feature* find_feature(const Identifier& id) const;
  const SketchEntity* find_entity(const Identifier& id) const;

  // Structural equality ignores source_name.
  friend bool operator==(const Program& a, const Program& b) {
    return a.features == b.features;
  }
};

// ---------------------------------------------------------------------------
// Traversal helpers

// Visits every query reachable from `value`, including queries nested in
// disambiguation data, in pre-order.
void for_each_query(const ParamValue& value, const std::function<void(const Query&)>& fn);
void for_each_query(const Feature& feature, const std::function<void(const Query&)>& fn);
void for_each_query(const Query& query, const std::function<void(const Query&)>& fn);

// Applies `fn` to every query (outermost first, then nested ones).
void transform_queries(ParamValue& value, const std::function<void(Query&)>& fn);
void transform_queries(Feature& feature, const std::function<void(Query&)>& fn);

// Applies `fn` to every scalar in the feature, including sketch entities.
void transform_scalars(Feature& feature, const std::function<void(Scalar&)>& fn);
void for_each_scalar(const Feature& feature, const std::function<void(const Scalar&)>& fn);

}  // namespace cadscript

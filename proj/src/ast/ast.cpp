#include "cadscript/ast.hpp"

#include <array>
#include <cctype>
#include <stdexcept>
#include <utility>

namespace cadscript {

// ---------------------------------------------------------------------------
// Identifier

Identifier Identifier::feature(std::size_t index) {
  return Identifier("F" + std::to_string(index));
}

Identifier Identifier::sketch_entity(std::size_t index) {
  return Identifier("S" + std::to_string(index));
}

Identifier::Family Identifier::family() const {
  if (text_.size() < 2) return Family::Opaque;
  for (std::size_t i = 1; i < text_.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text_[i]))) return Family::Opaque;
  }
  if (text_[1] == '0' && text_.size() > 2) return Family::Opaque;
  switch (text_[0]) {
    case 'F': return Family::Feature;
    case 'S': return Family::SketchEntity;
    case 'E': return Family::NamedEdge;
    case 'V': return Family::NamedVertex;
    default: return Family::Opaque;
  }
}

std::optional<std::size_t> Identifier::index() const {
  if (!is_canonical()) return std::nullopt;
  return static_cast<std::size_t>(std::stoull(text_.substr(1)));
}

// ---------------------------------------------------------------------------
// Units

namespace {

struct UnitInfo {
  Unit unit;
  std::string_view short_word;
  std::string_view long_word;
  Dimension dim;
};

constexpr std::array<UnitInfo, 7> kUnits = {{
    {Unit::Millimeter, "mm", "millimeter", Dimension::Length},
    {Unit::Centimeter, "cm", "centimeter", Dimension::Length},
    {Unit::Meter, "m", "meter", Dimension::Length},
    {Unit::Inch, "in", "inch", Dimension::Length},
    {Unit::Foot, "ft", "foot", Dimension::Length},
    {Unit::Degree, "deg", "degree", Dimension::Angle},
    {Unit::Radian, "rad", "radian", Dimension::Angle},
}};

}  // namespace

std::optional<Unit> unit_from_word(std::string_view word) {
  for (const auto& info : kUnits) {
    if (word == info.short_word || word == info.long_word) return info.unit;
  }
  return std::nullopt;
}

std::string_view unit_word(Unit unit) {
  return kUnits[static_cast<std::size_t>(unit)].long_word;
}

Dimension unit_dimension(Unit unit) {
  return kUnits[static_cast<std::size_t>(unit)].dim;
}

std::string_view canonical_unit_name(Dimension dim) {
  switch (dim) {
    case Dimension::Length: return "mm";
    case Dimension::Angle: return "deg";
    case Dimension::None: return "";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Expr

struct Expr::Node {
  Kind kind;
  Decimal value;
  Unit unit = Unit::Millimeter;
  std::optional<Expr> lhs;
  std::optional<Expr> rhs;
  SourcePos pos;
};

Expr Expr::literal(Decimal value, SourcePos pos) {
  return Expr(std::make_shared<const Node>(Node{Kind::Literal, std::move(value), Unit::Millimeter, std::nullopt, std::nullopt, pos}));
}

Expr Expr::pi(SourcePos pos) {
  return Expr(std::make_shared<const Node>(Node{Kind::Pi, Decimal(0), Unit::Millimeter, std::nullopt, std::nullopt, pos}));
}

Expr Expr::unit(Unit unit, SourcePos pos) {
  return Expr(std::make_shared<const Node>(Node{Kind::Unit, Decimal(0), unit, std::nullopt, std::nullopt, pos}));
}

Expr Expr::negate(Expr operand, SourcePos pos) {
  return Expr(std::make_shared<const Node>(Node{Kind::Negate, Decimal(0), Unit::Millimeter, std::move(operand), std::nullopt, pos}));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs, SourcePos pos) {
  if (kind != Kind::Add && kind != Kind::Sub && kind != Kind::Mul && kind != Kind::Div) {
    throw std::invalid_argument("Expr::binary: not a binary operator");
  }
  return Expr(std::make_shared<const Node>(Node{kind, Decimal(0), Unit::Millimeter, std::move(lhs), std::move(rhs), pos}));
}

Expr::Kind Expr::kind() const { return node_->kind; }
const Decimal& Expr::value() const { return node_->value; }
Unit Expr::unit_kind() const { return node_->unit; }
const Expr& Expr::lhs() const { return *node_->lhs; }
const Expr& Expr::rhs() const { return *node_->rhs; }
SourcePos Expr::pos() const { return node_->pos; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Expr::Kind::Literal: return a.value() == b.value();
    case Expr::Kind::Pi: return true;
    case Expr::Kind::Unit: return a.unit_kind() == b.unit_kind();
    case Expr::Kind::Negate: return a.lhs() == b.lhs();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

// ---------------------------------------------------------------------------
// Enumerations

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::Vertex: return "VERTEX";
    case EntityType::Edge: return "EDGE";
    case EntityType::Face: return "FACE";
    case EntityType::Body: return "BODY";
  }
  return "";
}

std::optional<EntityType> entity_type_from_string(std::string_view text) {
  if (text == "VERTEX") return EntityType::Vertex;
  if (text == "EDGE") return EntityType::Edge;
  if (text == "FACE") return EntityType::Face;
  if (text == "BODY") return EntityType::Body;
  return std::nullopt;
}

std::string_view to_string(DisambiguationKind kind) {
  return kind == DisambiguationKind::OriginalSet ? "originalSet" : "topology";
}

namespace {

struct EntityKindInfo {
  EntityKind kind;
  std::string_view name;
  std::string_view keyword;
};

constexpr std::array<EntityKindInfo, kEntityKindCount> kEntityKinds = {{
    {EntityKind::Line, "Line", "line"},
    {EntityKind::Circle, "Circle", "circle"},
    {EntityKind::Arc, "Arc", "arc"},
    {EntityKind::Ellipse, "Ellipse", "ellipse"},
    {EntityKind::EllipticalArc, "EllipticalArc", "ellipticalArc"},
    {EntityKind::Bezier, "Bezier", "bezier"},
    {EntityKind::Spline, "Spline", "spline"},
    {EntityKind::Text, "Text", "text"},
}};

struct OpKindInfo {
  OpKind kind;
  std::string_view name;
  std::string_view keyword;
};

constexpr std::array<OpKindInfo, kOpKindCount> kOpKinds = {{
    {OpKind::Sketch, "Sketch", "newSketch"},
    {OpKind::Extrude, "Extrude", "opExtrude"},
    {OpKind::Revolve, "Revolve", "opRevolve"},
    {OpKind::Sweep, "Sweep", "opSweep"},
    {OpKind::Loft, "Loft", "opLoft"},
    {OpKind::ConstructionPlane, "ConstructionPlane", "opPlane"},
    {OpKind::Fillet, "Fillet", "opFillet"},
    {OpKind::Chamfer, "Chamfer", "opChamfer"},
    {OpKind::Shell, "Shell", "opShell"},
    {OpKind::Hole, "Hole", "opHole"},
    {OpKind::Boolean, "Boolean", "opBoolean"},
    {OpKind::DeleteBody, "DeleteBody", "opDeleteBodies"},
    {OpKind::CircularPattern, "CircularPattern", "opCircularPattern"},
    {OpKind::Mirror, "Mirror", "opMirror"},
    {OpKind::Transform, "Transform", "opTransform"},
}};

}  // namespace

std::string_view to_string(EntityKind kind) {
  return kEntityKinds[static_cast<std::size_t>(kind)].name;
}

std::string_view entity_keyword(EntityKind kind) {
  return kEntityKinds[static_cast<std::size_t>(kind)].keyword;
}

std::optional<EntityKind> entity_kind_from_keyword(std::string_view keyword) {
  for (const auto& info : kEntityKinds) {
    if (info.keyword == keyword) return info.kind;
  }
  return std::nullopt;
}

std::string_view to_string(OpKind kind) {
  return kOpKinds[static_cast<std::size_t>(kind)].name;
}

std::string_view op_keyword(OpKind kind) {
  return kOpKinds[static_cast<std::size_t>(kind)].keyword;
}

std::optional<OpKind> op_kind_from_keyword(std::string_view keyword) {
  for (const auto& info : kOpKinds) {
    if (info.keyword == keyword) return info.kind;
  }
  return std::nullopt;
}

std::optional<OpKind> op_kind_from_string(std::string_view name) {
  for (const auto& info : kOpKinds) {
    if (info.name == name) return info.kind;
  }
  return std::nullopt;
}

const std::vector<OpKind>& all_op_kinds() {
  static const std::vector<OpKind> kinds = [] {
    std::vector<OpKind> out;
    for (const auto& info : kOpKinds) out.push_back(info.kind);
    return out;
  }();
  return kinds;
}

// ---------------------------------------------------------------------------
// Equality

bool operator==(const Disambiguation& a, const Disambiguation& b) {
  return a.kind == b.kind && a.queries == b.queries;
}

bool operator==(const Query& a, const Query& b) {
  return a.op_id == b.op_id && a.query_type == b.query_type &&
         a.entity_type == b.entity_type && a.disambiguation == b.disambiguation;
}

bool operator==(const ParamValue& a, const ParamValue& b) { return a.value == b.value; }

bool operator==(const SketchEntity& a, const SketchEntity& b) {
  return a.id == b.id && a.kind == b.kind && a.params == b.params;
}

bool operator==(const Feature& a, const Feature& b) {
  return a.id == b.id && a.kind == b.kind && a.params == b.params;
}

// ---------------------------------------------------------------------------
// Feature / Program

const ParamValue* Feature::param(std::string_view name) const {
  auto it = params.find(name);
  return it == params.end() ? nullptr : &it->second;
}

const SketchBody& Feature::entities() const {
  static const SketchBody kEmpty;
  if (kind != OpKind::Sketch) return kEmpty;
  const ParamValue* body = param("entities");
  if (body == nullptr || !body->is<SketchBody>()) return kEmpty;
  return body->as<SketchBody>();
}

SketchBody* Feature::mutable_entities() {
  if (kind != OpKind::Sketch) return nullptr;
  auto it = params.find("entities");
  if (it == params.end() || !it->second.is<SketchBody>()) return nullptr;
  return &it->second.as<SketchBody>();
}

std::optional<std::size_t> Program::owner_index(const Identifier& id) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].id == id) return i;
    for (const auto& entity : features[i].entities()) {
      if (entity.id == id) return i;
    }
  }
  return std::nullopt;
}

const Feature* Program::find_feature(const Identifier& id) const {
  for (const auto& f : features) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const SketchEntity* Program::find_entity(const Identifier& id) const {
  for (const auto& f : features) {
    for (const auto& entity : f.entities()) {
      if (entity.id == id) return &entity;
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Traversal

void for_each_query(const Query& query, const std::function<void(const Query&)>& fn) {
  fn(query);
  for (const auto& d : query.disambiguation) {
    for (const auto& q : d.queries) for_each_query(q, fn);
  }
}

void for_each_query(const ParamValue& value, const std::function<void(const Query&)>& fn) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Query>) {
          for_each_query(v, fn);
        } else if constexpr (std::is_same_v<T, QueryList>) {
          for (const auto& q : v) for_each_query(q, fn);
        } else if constexpr (std::is_same_v<T, ParamArray>) {
          for (const auto& item : v) for_each_query(item, fn);
        } else if constexpr (std::is_same_v<T, SketchBody>) {
          for (const auto& entity : v) {
            for (const auto& [name, p] : entity.params) for_each_query(p, fn);
          }
        }
      },
      value.value);
}

void for_each_query(const Feature& feature, const std::function<void(const Query&)>& fn) {
  for (const auto& [name, value] : feature.params) for_each_query(value, fn);
}

namespace {

void transform_query(Query& query, const std::function<void(Query&)>& fn) {
  fn(query);
  for (auto& d : query.disambiguation) {
    for (auto& q : d.queries) transform_query(q, fn);
  }
}

void transform_scalars_in(ParamValue& value, const std::function<void(Scalar&)>& fn) {
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Scalar>) {
          fn(v);
        } else if constexpr (std::is_same_v<T, Vec>) {
          for (auto& c : v.components) fn(c);
        } else if constexpr (std::is_same_v<T, ParamArray>) {
          for (auto& item : v) transform_scalars_in(item, fn);
        } else if constexpr (std::is_same_v<T, SketchBody>) {
          for (auto& entity : v) {
            for (auto& [name, p] : entity.params) transform_scalars_in(p, fn);
          }
        }
      },
      value.value);
}

}  // namespace

void transform_queries(ParamValue& value, const std::function<void(Query&)>& fn) {
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Query>) {
          transform_query(v, fn);
        } else if constexpr (std::is_same_v<T, QueryList>) {
          for (auto& q : v) transform_query(q, fn);
        } else if constexpr (std::is_same_v<T, ParamArray>) {
          for (auto& item : v) transform_queries(item, fn);
        } else if constexpr (std::is_same_v<T, SketchBody>) {
          for (auto& entity : v) {
            for (auto& [name, p] : entity.params) transform_queries(p, fn);
          }
        }
      },
      value.value);
}

void transform_queries(Feature& feature, const std::function<void(Query&)>& fn) {
  for (auto& [name, value] : feature.params) transform_queries(value, fn);
}

void transform_scalars(Feature& feature, const std::function<void(Scalar&)>& fn) {
  for (auto& [name, value] : feature.params) transform_scalars_in(value, fn);
}

void for_each_scalar(const Feature& feature, const std::function<void(const Scalar&)>& fn) {
  Feature copy = feature;
  transform_scalars(copy, [&](Scalar& s) { fn(s); });
}

}  // namespace cadscript

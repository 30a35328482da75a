#include "cadscript/schema.hpp"

#include <map>
#include <stdexcept>

namespace cadscript {

namespace {

ParamSpec req(std::string name, ValueType type, std::string doc,
              std::vector<std::string> keywords = {}) {
  return ParamSpec{std::move(name), type, true, std::nullopt, std::move(keywords), std::move(doc)};
}

ParamSpec opt(std::string name, ValueType type, ParamValue def, std::string doc,
              std::vector<std::string> keywords = {}) {
  return ParamSpec{std::move(name), type, false, std::move(def), std::move(keywords), std::move(doc)};
}

ParamValue zero3() {
  return Vec{{Scalar::length(0), Scalar::length(0), Scalar::length(0)}};
}

std::vector<FeatureSchema> build_feature_schemas() {
  const auto& planes = principal_planes();
  std::vector<FeatureSchema> s;
  s.push_back({OpKind::Sketch, "2D profile of lines, circles, arcs, ellipses, elliptical arcs, Bezier curves, splines and text placed on a plane.",
               {opt("plane", ValueType::PlaneRef, Keyword{"XY"}, "Principal plane or a query on a construction plane.", planes),
                req("entities", ValueType::SketchBody, "Sketch primitives, each with its own identifier.")}});
  s.push_back({OpKind::Extrude, "Extends a sketch profile linearly into a new solid body.",
               {req("profile", ValueType::ProfileRef, "Sketch region(s) to extrude."),
                req("depth", ValueType::Length, "Extent along the sketch normal."),
                opt("oppositeDirection", ValueType::Bool, false, "Extrude against the sketch normal."),
                opt("midplane", ValueType::Bool, false, "Center the solid on the sketch plane."),
                opt("secondDepth", ValueType::Length, Scalar::length(0), "Extent in the opposite direction."),
                opt("draft", ValueType::Angle, Scalar::angle(0), "Taper angle of the side walls.")}});
  s.push_back({OpKind::Revolve, "Sweeps a profile around an axis.",
               {req("profile", ValueType::ProfileRef, "Sketch region(s) to revolve."),
                req("axis", ValueType::Query, "Linear edge used as the rotation axis."),
                req("angle", ValueType::Angle, "Sweep angle."),
                opt("midplane", ValueType::Bool, false, "Sweep symmetrically about the profile.")}});
  s.push_back({OpKind::Sweep, "Moves a profile along a path.",
               {req("profile", ValueType::ProfileRef, "Sketch region(s) to sweep."),
                req("path", ValueType::QueryList, "Connected edges forming the path.")}});
  s.push_back({OpKind::Loft, "Interpolates a solid between profiles.",
               {req("profiles", ValueType::QueryList, "Ordered profiles (faces or regions).")}});
  s.push_back({OpKind::ConstructionPlane, "Reference plane offset and tilted from a principal plane.",
               {req("base", ValueType::Keyword, "Principal plane.", planes),
                opt("offset", ValueType::Length, Scalar::length(0), "Translation along the plane normal."),
                opt("angle", ValueType::Angle, Scalar::angle(0), "Rotation about the base plane's x axis.")}});
  s.push_back({OpKind::Fillet, "Rounds edges.",
               {req("entities", ValueType::QueryList, "Edges or faces to round."),
                req("radius", ValueType::Length, "Fillet radius.")}});
  s.push_back({OpKind::Chamfer, "Bevels edges.",
               {req("entities", ValueType::QueryList, "Edges or faces to bevel."),
                req("distance", ValueType::Length, "Setback distance.")}});
  s.push_back({OpKind::Shell, "Hollows a solid leaving walls of constant thickness.",
               {req("faces", ValueType::QueryList, "Faces removed to open the shell."),
                req("thickness", ValueType::Length, "Wall thickness.")}});
  s.push_back({OpKind::Hole, "Drills a parametric hole.",
               {req("targets", ValueType::QueryList, "Bodies to cut."),
                req("location", ValueType::Point3, "Hole start point."),
                req("direction", ValueType::Direction3, "Drilling direction."),
                req("diameter", ValueType::Length, "Hole diameter."),
                req("depth", ValueType::Length, "Hole depth."),
                opt("countersinkDiameter", ValueType::Length, Scalar::length(0), "Countersink diameter, 0 for none.")}});
  s.push_back({OpKind::Boolean, "Union, subtraction or intersection of bodies.",
               {req("mode", ValueType::Keyword, "Boolean sub-mode.", {"UNION", "SUBTRACT", "INTERSECT"}),
                req("targets", ValueType::QueryList, "Bodies kept or combined."),
                opt("tools", ValueType::QueryList, QueryList{}, "Bodies subtracted or intersected.")}});
  s.push_back({OpKind::DeleteBody, "Removes construction intermediates.",
               {req("entities", ValueType::QueryList, "Bodies to delete.")}});
  s.push_back({OpKind::CircularPattern, "Repeats bodies around an axis.",
               {req("entities", ValueType::QueryList, "Bodies to repeat."),
                req("axis", ValueType::Query, "Rotation axis."),
                req("count", ValueType::Number, "Number of instances including the seed."),
                opt("angle", ValueType::Angle, Scalar::angle(360), "Total angular span.")}});
  s.push_back({OpKind::Mirror, "Reflects bodies across a plane.",
               {req("entities", ValueType::QueryList, "Bodies to reflect."),
                req("plane", ValueType::PlaneRef, "Mirror plane.", planes)}});
  s.push_back({OpKind::Transform, "Translates and scales bodies.",
               {req("entities", ValueType::QueryList, "Bodies to move."),
                opt("translation", ValueType::Point3, zero3(), "Translation vector."),
                opt("scale", ValueType::Number, Scalar::number(1), "Uniform scale factor.")}});
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<std::size_t>(s[i].kind) != i) throw std::logic_error("feature schema order");
  }
  return s;
}

std::vector<EntitySchema> build_entity_schemas() {
  std::vector<EntitySchema> s;
  s.push_back({EntityKind::Line,
               {{"explicit", {req("start", ValueType::Point2, "Start point."), req("end", ValueType::Point2, "End point.")}},
                {"point-direction", {req("origin", ValueType::Point2, "Start point."), req("direction", ValueType::Direction2, "Direction vector."), req("length", ValueType::Length, "Line length.")}}}});
  s.push_back({EntityKind::Circle,
               {{"explicit", {req("center", ValueType::Point2, "Center."), req("radius", ValueType::Length, "Radius, > 0.")}}}});
  s.push_back({EntityKind::Arc,
               {{"explicit", {req("start", ValueType::Point2, "Start point."), req("mid", ValueType::Point2, "Point on the arc between start and end."), req("end", ValueType::Point2, "End point.")}},
                {"center-angles", {req("center", ValueType::Point2, "Center."), req("radius", ValueType::Length, "Radius."), req("startAngle", ValueType::Angle, "Start angle, counter-clockwise from +x."), req("endAngle", ValueType::Angle, "End angle.")}}}});
  s.push_back({EntityKind::Ellipse,
               {{"explicit", {req("center", ValueType::Point2, "Center."), req("majorAxis", ValueType::Direction2, "Major axis direction."), req("majorRadius", ValueType::Length, "Major radius."), req("minorRadius", ValueType::Length, "Minor radius.")}}}});
  s.push_back({EntityKind::EllipticalArc,
               {{"explicit", {req("center", ValueType::Point2, "Center."), req("majorAxis", ValueType::Direction2, "Major axis direction."), req("majorRadius", ValueType::Length, "Major radius."), req("minorRadius", ValueType::Length, "Minor radius."), req("startAngle", ValueType::Angle, "Start parameter angle."), req("endAngle", ValueType::Angle, "End parameter angle.")}}}});
  s.push_back({EntityKind::Bezier,
               {{"explicit", {req("points", ValueType::PointArray, "Control points.")}}}});
  s.push_back({EntityKind::Spline,
               {{"explicit", {req("points", ValueType::PointArray, "Interpolation points.")}}}});
  s.push_back({EntityKind::Text,
               {{"explicit", {req("text", ValueType::Text, "UTF-8 string."), req("anchor", ValueType::Point2, "Lower-left anchor.")}}}});
  return s;
}

bool scalar_ok(const ParamValue& v, Dimension dim) {
  return v.is<Scalar>() && v.as<Scalar>().dim == dim;
}

bool vec_ok(const ParamValue& v, std::size_t n, Dimension dim) {
  if (!v.is<Vec>()) return false;
  const auto& c = v.as<Vec>().components;
  if (c.size() != n) return false;
  for (const auto& s : c) {
    if (s.dim != dim) return false;
  }
  return true;
}

bool keyword_ok(const ParamValue& v, const std::vector<std::string>& keywords) {
  if (!v.is<Keyword>()) return false;
  for (const auto& k : keywords) {
    if (k == v.as<Keyword>().name) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::Length: return "length";
    case ValueType::Angle: return "angle";
    case ValueType::Number: return "number";
    case ValueType::Bool: return "bool";
    case ValueType::Text: return "text";
    case ValueType::Keyword: return "keyword";
    case ValueType::Query: return "query";
    case ValueType::QueryList: return "query list";
    case ValueType::ProfileRef: return "query or query list";
    case ValueType::PlaneRef: return "plane keyword or query";
    case ValueType::Point2: return "2D point";
    case ValueType::Direction2: return "2D direction";
    case ValueType::Point3: return "3D point";
    case ValueType::Direction3: return "3D direction";
    case ValueType::PointArray: return "point list";
    case ValueType::SketchBody: return "sketch body";
  }
  return "";
}

Dimension scalar_dimension(ValueType type) {
  switch (type) {
    case ValueType::Length:
    case ValueType::Point2:
    case ValueType::Point3:
    case ValueType::PointArray:
      return Dimension::Length;
    case ValueType::Angle:
      return Dimension::Angle;
    default:
      return Dimension::None;
  }
}

const std::vector<std::string>& principal_planes() {
  static const std::vector<std::string> planes = {"XY", "XZ", "YZ"};
  return planes;
}

const ParamSpec* FeatureSchema::find(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const ParamSpec* EntityForm::find(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const FeatureSchema& feature_schema(OpKind kind) {
  static const std::vector<FeatureSchema> schemas = build_feature_schemas();
  return schemas[static_cast<std::size_t>(kind)];
}

const EntitySchema& entity_schema(EntityKind kind) {
  static const std::vector<EntitySchema> schemas = build_entity_schemas();
  return schemas[static_cast<std::size_t>(kind)];
}

std::optional<std::size_t> match_entity_form(const SketchEntity& entity) {
  const auto& forms = entity_schema(entity.kind).forms;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (check_params(entity.params, forms[i].params).empty()) return i;
  }
  return std::nullopt;
}

bool value_matches(const ParamValue& v, const ParamSpec& spec) {
  switch (spec.type) {
    case ValueType::Length: return scalar_ok(v, Dimension::Length);
    case ValueType::Angle: return scalar_ok(v, Dimension::Angle);
    case ValueType::Number: return scalar_ok(v, Dimension::None);
    case ValueType::Bool: return v.is<bool>();
    case ValueType::Text: return v.is<Text>();
    case ValueType::Keyword: return keyword_ok(v, spec.keywords);
    case ValueType::Query: return v.is<Query>();
    case ValueType::QueryList: return v.is<QueryList>();
    case ValueType::ProfileRef: return v.is<Query>() || v.is<QueryList>();
    case ValueType::PlaneRef: return v.is<Query>() || keyword_ok(v, spec.keywords);
    case ValueType::Point2: return vec_ok(v, 2, Dimension::Length);
    case ValueType::Direction2: return vec_ok(v, 2, Dimension::None);
    case ValueType::Point3: return vec_ok(v, 3, Dimension::Length);
    case ValueType::Direction3: return vec_ok(v, 3, Dimension::None);
    case ValueType::PointArray: {
      if (!v.is<ParamArray>()) return false;
      for (const auto& item : v.as<ParamArray>()) {
        if (!vec_ok(item, 2, Dimension::Length)) return false;
      }
      return true;
    }
    case ValueType::SketchBody: return v.is<SketchBody>();
  }
  return false;
}

std::vector<std::string> check_params(const Params& params, const std::vector<ParamSpec>& specs) {
  std::vector<std::string> problems;
  for (const auto& spec : specs) {
    auto it = params.find(spec.name);
    if (it == params.end()) {
      if (spec.required) problems.push_back("missing required parameter '" + spec.name + "'");
      continue;
    }
    if (!value_matches(it->second, spec)) {
      problems.push_back("parameter '" + spec.name + "' expects " + std::string(to_string(spec.type)));
    }
  }
  for (const auto& [name, value] : params) {
    bool known = false;
    for (const auto& spec : specs) known = known || spec.name == name;
    if (!known) problems.push_back("unknown parameter '" + name + "'");
  }
  return problems;
}

}  // namespace cadscript

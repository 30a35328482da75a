#include "cadscript/json_io.hpp"

#include "cadscript/parser.hpp"

namespace cadscript {

using nlohmann::ordered_json;

namespace {

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Length: return "length";
    case Dimension::Angle: return "angle";
    case Dimension::None: return "none";
  }
  return "none";
}

Dimension dimension_from(const std::string& s) {
  if (s == "length") return Dimension::Length;
  if (s == "angle") return Dimension::Angle;
  if (s == "none") return Dimension::None;
  throw JsonFormatError("unknown dimension '" + s + "'");
}

ordered_json scalar_json(const Scalar& s) {
  ordered_json j;
  j["type"] = "Scalar";
  if (s.is_literal()) {
    j["value"] = s.value().to_string();
  } else {
    j["expr"] = emit_expression(s.expr);
  }
  j["dimension"] = dimension_name(s.dim);
  if (s.dim != Dimension::None) j["unit"] = canonical_unit_name(s.dim);
  return j;
}

ordered_json params_json(const Params& params);

ordered_json value_json(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> ordered_json {
        using T = std::decay_t<decltype(x)>;
        ordered_json j;
        if constexpr (std::is_same_v<T, Scalar>) {
          return scalar_json(x);
        } else if constexpr (std::is_same_v<T, Vec>) {
          j["type"] = "Vec";
          j["components"] = ordered_json::array();
          for (const auto& c : x.components) j["components"].push_back(scalar_json(c));
        } else if constexpr (std::is_same_v<T, bool>) {
          j["type"] = "Boolean";
          j["value"] = x;
        } else if constexpr (std::is_same_v<T, Text>) {
          j["type"] = "Text";
          j["value"] = x.value;
        } else if constexpr (std::is_same_v<T, Keyword>) {
          j["type"] = "Keyword";
          j["value"] = x.name;
        } else if constexpr (std::is_same_v<T, Query>) {
          return to_json(x);
        } else if constexpr (std::is_same_v<T, QueryList>) {
          j["type"] = "EntityList";
          j["items"] = ordered_json::array();
          for (const auto& q : x) j["items"].push_back(to_json(q));
        } else if constexpr (std::is_same_v<T, ParamArray>) {
          j["type"] = "Array";
          j["items"] = ordered_json::array();
          for (const auto& item : x) j["items"].push_back(value_json(item));
        } else if constexpr (std::is_same_v<T, SketchBody>) {
          j["type"] = "SketchBody";
          j["entities"] = ordered_json::array();
          for (const auto& e : x) {
            ordered_json ej;
            ej["id"] = e.id.text();
            ej["kind"] = to_string(e.kind);
            ej["params"] = params_json(e.params);
            j["entities"].push_back(std::move(ej));
          }
        }
        return j;
      },
      v.value);
}

ordered_json params_json(const Params& params) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, value] : params) j[name] = value_json(value);
  return j;
}

// -- import -----------------------------------------------------------------

const ordered_json& field(const ordered_json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw JsonFormatError(std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

std::string string_field(const ordered_json& j, const char* name) {
  const auto& f = field(j, name);
  if (!f.is_string()) throw JsonFormatError(std::string("field '") + name + "' must be a string");
  return f.get<std::string>();
}

Scalar scalar_from(const ordered_json& j) {
  Dimension dim = dimension_from(string_field(j, "dimension"));
  if (j.contains("value")) {
    auto d = Decimal::parse(string_field(j, "value"));
    if (!d) throw JsonFormatError("malformed decimal '" + string_field(j, "value") + "'");
    return Scalar{Expr::literal(*d), dim};
  }
  try {
    return Scalar{parse_expression(string_field(j, "expr")), dim};
  } catch (const ParseError& e) {
    throw JsonFormatError(std::string("malformed expression: ") + e.what());
  }
}

Query query_from(const ordered_json& j) {
  Query q;
  q.op_id = Identifier(string_field(j, "op_id"));
  q.query_type = string_field(j, "query_type");
  auto et = entity_type_from_string(string_field(j, "entity_type"));
  if (!et) throw JsonFormatError("unknown entity type '" + string_field(j, "entity_type") + "'");
  q.entity_type = *et;
  for (const auto& dj : field(j, "disambiguation")) {
    Disambiguation d;
    std::string kind = string_field(dj, "kind");
    if (kind == "originalSet") {
      d.kind = DisambiguationKind::OriginalSet;
    } else if (kind == "topology") {
      d.kind = DisambiguationKind::Topology;
    } else {
      throw JsonFormatError("unknown disambiguation kind '" + kind + "'");
    }
    for (const auto& nq : field(dj, "queries")) d.queries.push_back(query_from(nq));
    q.disambiguation.push_back(std::move(d));
  }
  return q;
}

Params params_from(const ordered_json& j);

ParamValue value_from(const ordered_json& j) {
  std::string type = string_field(j, "type");
  if (type == "Scalar") return scalar_from(j);
  if (type == "Vec") {
    Vec v;
    for (const auto& c : field(j, "components")) v.components.push_back(scalar_from(c));
    return v;
  }
  if (type == "Boolean") {
    const auto& f = field(j, "value");
    if (!f.is_boolean()) throw JsonFormatError("field 'value' must be a boolean");
    return f.get<bool>();
  }
  if (type == "Text") return Text{string_field(j, "value")};
  if (type == "Keyword") return Keyword{string_field(j, "value")};
  if (type == "Query") return query_from(j);
  if (type == "EntityList") {
    QueryList list;
    for (const auto& q : field(j, "items")) list.push_back(query_from(q));
    return list;
  }
  if (type == "Array") {
    ParamArray items;
    for (const auto& item : field(j, "items")) items.push_back(value_from(item));
    return items;
  }
  if (type == "SketchBody") {
    SketchBody body;
    for (const auto& ej : field(j, "entities")) {
      SketchEntity e;
      e.id = Identifier(string_field(ej, "id"));
      std::string kind = string_field(ej, "kind");
      bool found = false;
      for (std::size_t k = 0; k < kEntityKindCount; ++k) {
        if (to_string(static_cast<EntityKind>(k)) == kind) {
          e.kind = static_cast<EntityKind>(k);
          found = true;
        }
      }
      if (!found) throw JsonFormatError("unknown sketch entity kind '" + kind + "'");
      e.params = params_from(field(ej, "params"));
      body.push_back(std::move(e));
    }
    return body;
  }
  throw JsonFormatError("unknown value type '" + type + "'");
}

Params params_from(const ordered_json& j) {
  if (!j.is_object()) throw JsonFormatError("'params' must be an object");
  Params params;
  for (const auto& [name, value] : j.items()) params.emplace(name, value_from(value));
  return params;
}

}  // namespace

ordered_json to_json(const Query& q) {
  ordered_json j;
  j["type"] = "Query";
  j["op_id"] = q.op_id.text();
  j["query_type"] = q.query_type;
  j["entity_type"] = to_string(q.entity_type);
  j["disambiguation"] = ordered_json::array();
  for (const auto& d : q.disambiguation) {
    ordered_json dj;
    dj["kind"] = to_string(d.kind);
    dj["queries"] = ordered_json::array();
    for (const auto& nq : d.queries) dj["queries"].push_back(to_json(nq));
    j["disambiguation"].push_back(std::move(dj));
  }
  return j;
}

ordered_json to_json(const Program& program) {
  ordered_json j;
  j["source_name"] = program.source_name;
  j["features"] = ordered_json::array();
  for (const auto& f : program.features) {
    ordered_json fj;
    fj["id"] = f.id.text();
    fj["kind"] = to_string(f.kind);
    fj["params"] = params_json(f.params);
    j["features"].push_back(std::move(fj));
  }
  return j;
}

Program program_from_json(const ordered_json& doc) {
  Program p;
  if (doc.contains("source_name")) p.source_name = string_field(doc, "source_name");
  for (const auto& fj : field(doc, "features")) {
    Feature f;
    f.id = Identifier(string_field(fj, "id"));
    auto kind = op_kind_from_string(string_field(fj, "kind"));
    if (!kind) throw JsonFormatError("unknown operation kind '" + string_field(fj, "kind") + "'");
    f.kind = *kind;
    f.params = params_from(field(fj, "params"));
    p.features.push_back(std::move(f));
  }
  return p;
}

}  // namespace cadscript

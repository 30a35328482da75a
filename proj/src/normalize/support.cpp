#include <algorithm>
#include <set>
#include <sstream>

#include "cadscript/normalize.hpp"

namespace cadscript {

namespace {

std::string format_pass_error(const std::string& pass, const std::string& message,
                              const std::optional<SourcePos>& pos) {
  std::ostringstream os;
  os << pass << ": ";
  if (pos && pos->line > 0) os << pos->line << ":" << pos->column << ": ";
  os << message;
  return os.str();
}

Decimal unit_factor(Unit unit) {
  switch (unit) {
    case Unit::Millimeter: return 1;
    case Unit::Centimeter: return 10;
    case Unit::Meter: return 1000;
    case Unit::Inch: return *Decimal::parse("25.4");
    case Unit::Foot: return *Decimal::parse("304.8");
    case Unit::Degree: return 1;
    case Unit::Radian: return Decimal(180) / Decimal::pi();
  }
  return 1;
}

std::string_view dimension_noun(Dimension d) {
  switch (d) {
    case Dimension::Length: return "length";
    case Dimension::Angle: return "angle";
    case Dimension::None: return "dimensionless";
  }
  return "";
}

Decimal eval(const Expr& e, Dimension dim, const std::string& pass) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
      return e.value();
    case Expr::Kind::Pi:
      return Decimal::pi();
    case Expr::Kind::Unit:
      if (unit_dimension(e.unit_kind()) != dim) {
        throw PassError(pass,
                        "unit '" + std::string(unit_word(e.unit_kind())) + "' in " +
                            std::string(dimension_noun(dim)) + " value",
                        e.pos());
      }
      return unit_factor(e.unit_kind());
    case Expr::Kind::Negate:
      return -eval(e.lhs(), dim, pass);
    case Expr::Kind::Add:
      return eval(e.lhs(), dim, pass) + eval(e.rhs(), dim, pass);
    case Expr::Kind::Sub:
      return eval(e.lhs(), dim, pass) - eval(e.rhs(), dim, pass);
    case Expr::Kind::Mul:
      return eval(e.lhs(), dim, pass) * eval(e.rhs(), dim, pass);
    case Expr::Kind::Div: {
      Decimal divisor = eval(e.rhs(), dim, pass);
      if (divisor.is_zero()) throw PassError(pass, "division by zero", e.pos());
      return eval(e.lhs(), dim, pass) / divisor;
    }
  }
  return 0;
}

}  // namespace

PassError::PassError(std::string pass, std::string message, std::optional<SourcePos> pos)
    : std::runtime_error(format_pass_error(pass, message, pos)),
      pass_(std::move(pass)),
      message_(std::move(message)),
      pos_(pos) {}

Decimal evaluate_scalar(const Scalar& scalar, const std::string& pass) {
  Decimal v = eval(scalar.expr, scalar.dim, pass);
  if (!v.is_finite()) throw PassError(pass, "non-finite value", scalar.expr.pos());
  return v;
}

const std::vector<std::string>& default_pass_order() {
  static const std::vector<std::string> order = {
      kExplicitSketchParams, kStandardizeUnits,  kFoldNumericExpressions, kSimplifyOperations,
      kEliminateDeadCode,    kRenameIdentifiers, kCanonicalizeQueries,    kRoundPrecision};
  return order;
}

void PassConfig::check() const {
  if (precision_decimals < 0) throw std::invalid_argument("precision_decimals must be >= 0");
  if (canonical_length_unit != "mm") {
    throw std::invalid_argument("canonical_length_unit must be mm");
  }
  if (canonical_angle_unit != "deg") {
    throw std::invalid_argument("canonical_angle_unit must be deg");
  }
  std::set<std::string> seen;
  const auto& known = default_pass_order();
  for (const auto& name : enabled_passes) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw std::invalid_argument("unknown pass '" + name + "'");
    }
    if (!seen.insert(name).second) throw std::invalid_argument("pass '" + name + "' listed twice");
  }
}

PassConfig PassConfig::from_json(const nlohmann::ordered_json& j) {
  PassConfig c;
  if (!j.is_object()) throw std::invalid_argument("pass config must be a JSON object");
  try {
    if (j.contains("precision_decimals")) c.precision_decimals = j.at("precision_decimals").get<int>();
    if (j.contains("canonical_length_unit")) {
      c.canonical_length_unit = j.at("canonical_length_unit").get<std::string>();
    }
    if (j.contains("canonical_angle_unit")) {
      c.canonical_angle_unit = j.at("canonical_angle_unit").get<std::string>();
    }
    if (j.contains("enabled_passes")) {
      c.enabled_passes = j.at("enabled_passes").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("pass config: ") + e.what());
  }
  c.check();
  return c;
}

nlohmann::ordered_json PassConfig::to_json() const {
  nlohmann::ordered_json j;
  j["precision_decimals"] = precision_decimals;
  j["canonical_length_unit"] = canonical_length_unit;
  j["canonical_angle_unit"] = canonical_angle_unit;
  j["enabled_passes"] = enabled_passes;
  return j;
}

const PassEntry* PassReport::find(std::string_view name) const {
  for (const auto& p : passes) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

nlohmann::ordered_json PassReport::to_json() const {
  nlohmann::ordered_json j;
  j["source_name"] = source_name;
  j["passes"] = nlohmann::ordered_json::array();
  for (const auto& p : passes) {
    nlohmann::ordered_json pj;
    pj["name"] = p.name;
    pj["features_changed"] = p.features_changed;
    pj["entities_removed"] = p.entities_removed;
    pj["identifiers_renamed"] = nlohmann::ordered_json::object();
    for (const auto& [from, to] : p.identifiers_renamed) pj["identifiers_renamed"][from] = to;
    pj["notes"] = p.notes;
    pj["diagnostics"] = nlohmann::ordered_json::array();
    for (const auto& d : p.diagnostics) {
      pj["diagnostics"].push_back({{"feature_id", d.feature_id.text()},
                                   {"severity", std::string(cadscript::to_string(d.severity))},
                                   {"message", d.message}});
    }
    j["passes"].push_back(std::move(pj));
  }
  return j;
}

}  // namespace cadscript

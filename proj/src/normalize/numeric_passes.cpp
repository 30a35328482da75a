#include "cadscript/normalize.hpp"
#include "cadscript/schema.hpp"

namespace cadscript {

namespace {

void count_changes(const Program& before, const Program& after, PassEntry* entry) {
  if (entry == nullptr) return;
  for (std::size_t i = 0; i < before.features.size() && i < after.features.size(); ++i) {
    if (!(before.features[i] == after.features[i])) ++entry->features_changed;
  }
}

const Vec& vec_param(const SketchEntity& e, std::string_view name) {
  return e.params.find(name)->second.as<Vec>();
}

const Scalar& scalar_param(const SketchEntity& e, std::string_view name) {
  return e.params.find(name)->second.as<Scalar>();
}

Vec literal_point(const Decimal& x, const Decimal& y) {
  return Vec{{Scalar::length(x), Scalar::length(y)}};
}

void require_finite(const SketchEntity& e, std::initializer_list<Decimal> values) {
  for (const auto& v : values) {
    if (!v.is_finite()) {
      throw PassError(kExplicitSketchParams,
                      "non-finite coordinate derived for sketch entity '" + e.id.text() + "'");
    }
  }
}

SketchEntity explicit_line(const SketchEntity& e) {
  const std::string pass = kExplicitSketchParams;
  const Vec& origin = vec_param(e, "origin");
  const Vec& dir = vec_param(e, "direction");
  Decimal ox = evaluate_scalar(origin.components[0], pass);
  Decimal oy = evaluate_scalar(origin.components[1], pass);
  Decimal dx = evaluate_scalar(dir.components[0], pass);
  Decimal dy = evaluate_scalar(dir.components[1], pass);
  Decimal length = evaluate_scalar(scalar_param(e, "length"), pass);
  Decimal norm2 = dx * dx + dy * dy;
  if (norm2.is_zero()) {
    throw PassError(pass, "zero direction vector in sketch entity '" + e.id.text() + "'");
  }
  // Unit directions are used as written so exact inputs stay exact.
  Decimal scale = norm2 == Decimal(1) ? length : length / norm2.sqrt();
  Decimal ex = ox + dx * scale;
  Decimal ey = oy + dy * scale;
  require_finite(e, {ex, ey});

  SketchEntity out{e.id, EntityKind::Line, {}};
  out.params.emplace("start", origin);
  out.params.emplace("end", literal_point(ex, ey));
  return out;
}

SketchEntity explicit_arc(const SketchEntity& e) {
  const std::string pass = kExplicitSketchParams;
  const Vec& center = vec_param(e, "center");
  Decimal cx = evaluate_scalar(center.components[0], pass);
  Decimal cy = evaluate_scalar(center.components[1], pass);
  Decimal r = evaluate_scalar(scalar_param(e, "radius"), pass);
  Decimal a0 = evaluate_scalar(scalar_param(e, "startAngle"), pass);
  Decimal a1 = evaluate_scalar(scalar_param(e, "endAngle"), pass);
  // Arcs run counter-clockwise from the start angle to the end angle.
  while (a1 < a0) a1 = a1 + Decimal(360);
  if (a1 == a0 || a1 - a0 >= Decimal(360)) {
    throw PassError(pass, "arc sweep must lie in (0, 360) degrees in sketch entity '" + e.id.text() + "'");
  }
  Decimal am = (a0 + a1) / Decimal(2);
  auto at = [&](const Decimal& a) {
    return std::make_pair(cx + r * a.cos_deg(), cy + r * a.sin_deg());
  };
  auto [sx, sy] = at(a0);
  auto [mx, my] = at(am);
  auto [ex, ey] = at(a1);
  require_finite(e, {sx, sy, mx, my, ex, ey});

  SketchEntity out{e.id, EntityKind::Arc, {}};
  out.params.emplace("start", literal_point(sx, sy));
  out.params.emplace("mid", literal_point(mx, my));
  out.params.emplace("end", literal_point(ex, ey));
  return out;
}

Expr standardize_expr(const Expr& e, Dimension dim) {
  auto check_unit = [&](const Expr& u) {
    if (unit_dimension(u.unit_kind()) != dim) {
      std::string noun = dim == Dimension::Length ? "length" : dim == Dimension::Angle ? "angle" : "dimensionless";
      throw PassError(kStandardizeUnits,
                      "unit '" + std::string(unit_word(u.unit_kind())) + "' in " + noun + " value", u.pos());
    }
  };
  auto factor_expr = [&](const Expr& u) -> Expr {
    check_unit(u);
    switch (u.unit_kind()) {
      case Unit::Millimeter:
      case Unit::Degree:
        return Expr::literal(1, u.pos());
      case Unit::Centimeter:
        return Expr::literal(10, u.pos());
      case Unit::Meter:
        return Expr::literal(1000, u.pos());
      case Unit::Inch:
        return Expr::literal(*Decimal::parse("25.4"), u.pos());
      case Unit::Foot:
        return Expr::literal(*Decimal::parse("304.8"), u.pos());
      case Unit::Radian:
        return Expr::binary(Expr::Kind::Div, Expr::literal(180, u.pos()), Expr::pi(u.pos()), u.pos());
    }
    return Expr::literal(1, u.pos());
  };

  switch (e.kind()) {
    case Expr::Kind::Literal:
    case Expr::Kind::Pi:
      return e;
    case Expr::Kind::Unit:
      return factor_expr(e);
    case Expr::Kind::Negate:
      return Expr::negate(standardize_expr(e.lhs(), dim), e.pos());
    case Expr::Kind::Mul: {
      // `literal * unit` with an exact factor becomes a single literal.
      const Expr& l = e.lhs();
      const Expr& r = e.rhs();
      if (l.is_literal() && r.kind() == Expr::Kind::Unit) {
        Expr f = factor_expr(r);
        if (f.is_literal()) return Expr::literal(l.value() * f.value(), l.pos());
      }
      if (r.is_literal() && l.kind() == Expr::Kind::Unit) {
        Expr f = factor_expr(l);
        if (f.is_literal()) return Expr::literal(r.value() * f.value(), r.pos());
      }
      return Expr::binary(e.kind(), standardize_expr(l, dim), standardize_expr(r, dim), e.pos());
    }
    default:
      return Expr::binary(e.kind(), standardize_expr(e.lhs(), dim),
                          standardize_expr(e.rhs(), dim), e.pos());
  }
}

}  // namespace

Program explicit_sketch_params(const Program& program, PassEntry* entry) {
  Program out = program;
  for (auto& f : out.features) {
    SketchBody* body = f.mutable_entities();
    if (body == nullptr) continue;
    for (auto& e : *body) {
      auto form = match_entity_form(e);
      if (!form || *form == 0) continue;
      if (e.kind == EntityKind::Line) {
        e = explicit_line(e);
      } else if (e.kind == EntityKind::Arc) {
        e = explicit_arc(e);
      }
    }
  }
  count_changes(program, out, entry);
  return out;
}

Program standardize_units(const Program& program, PassEntry* entry) {
  Program out = program;
  for (auto& f : out.features) {
    transform_scalars(f, [](Scalar& s) {
      if (!s.is_literal()) s.expr = standardize_expr(s.expr, s.dim);
    });
  }
  count_changes(program, out, entry);
  return out;
}

Program fold_numeric_expressions(const Program& program, PassEntry* entry) {
  Program out = program;
  for (auto& f : out.features) {
    transform_scalars(f, [](Scalar& s) {
      if (!s.is_literal()) {
        s.expr = Expr::literal(evaluate_scalar(s, kFoldNumericExpressions), s.expr.pos());
      }
    });
  }
  count_changes(program, out, entry);
  return out;
}

Program round_precision(const Program& program, int decimals, PassEntry* entry) {
  Program out = program;
  for (auto& f : out.features) {
    transform_scalars(f, [decimals](Scalar& s) {
      if (s.is_literal()) s.expr = Expr::literal(s.value().rounded(decimals), s.expr.pos());
    });
  }
  count_changes(program, out, entry);
  return out;
}

}  // namespace cadscript

#include <sstream>

#include "cadscript/parser.hpp"
#include "cadscript/schema.hpp"

namespace cadscript {

namespace {

constexpr std::string_view kIndent = "    ";

int precedence(Expr::Kind kind) {
  switch (kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div:
      return 2;
    case Expr::Kind::Negate:
      return 3;
    default:
      return 4;
  }
}

void write_expr(std::ostream& os, const Expr& e, int parent_prec, bool right_operand) {
  int prec = precedence(e.kind());
  // Left-associative operators need parentheses on the right at equal
  // precedence: a - (b - c).
  bool parens = prec < parent_prec || (right_operand && prec == parent_prec && prec < 3);
  if (e.kind() == Expr::Kind::Literal && e.value().is_negative() && right_operand) parens = true;
  if (parens) os << '(';
  switch (e.kind()) {
    case Expr::Kind::Literal:
      os << e.value().to_string();
      break;
    case Expr::Kind::Pi:
      os << "PI";
      break;
    case Expr::Kind::Unit:
      os << unit_word(e.unit_kind());
      break;
    case Expr::Kind::Negate:
      os << '-';
      write_expr(os, e.lhs(), 3, false);
      break;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      static constexpr std::string_view ops[] = {" + ", " - ", " * ", " / "};
      write_expr(os, e.lhs(), prec, false);
      os << ops[static_cast<int>(e.kind()) - static_cast<int>(Expr::Kind::Add)];
      write_expr(os, e.rhs(), prec, true);
      break;
    }
  }
  if (parens) os << ')';
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '\\' || c == '"') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

void write_query(std::ostream& os, const Query& q);

void write_query_list(std::ostream& os, const QueryList& list) {
  os << '[';
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i > 0) os << ", ";
    write_query(os, list[i]);
  }
  os << ']';
}

void write_query(std::ostream& os, const Query& q) {
  os << "makeQuery(" << q.op_id.text() << ", " << q.query_type << ", " << to_string(q.entity_type);
  if (!q.disambiguation.empty()) {
    os << ", [";
    for (std::size_t i = 0; i < q.disambiguation.size(); ++i) {
      const auto& d = q.disambiguation[i];
      if (i > 0) os << ", ";
      os << to_string(d.kind) << '(';
      for (std::size_t k = 0; k < d.queries.size(); ++k) {
        if (k > 0) os << ", ";
        write_query(os, d.queries[k]);
      }
      os << ')';
    }
    os << ']';
  }
  os << ')';
}

void write_params(std::ostream& os, const Params& params, const std::vector<ParamSpec>& order,
                  int depth);

void write_entity(std::ostream& os, const SketchEntity& e, int depth) {
  const auto& schema = entity_schema(e.kind);
  auto form = match_entity_form(e).value_or(0);
  os << entity_keyword(e.kind) << '(' << e.id.text();
  write_params(os, e.params, schema.forms[form].params, depth);
  os << ");";
}

void write_value(std::ostream& os, const ParamValue& v, int depth) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Scalar>) {
          os << emit_scalar(x);
        } else if constexpr (std::is_same_v<T, Vec>) {
          os << '(';
          for (std::size_t i = 0; i < x.components.size(); ++i) {
            if (i > 0) os << ", ";
            os << emit_scalar(x.components[i]);
          }
          os << ')';
        } else if constexpr (std::is_same_v<T, bool>) {
          os << (x ? "true" : "false");
        } else if constexpr (std::is_same_v<T, Text>) {
          os << quote(x.value);
        } else if constexpr (std::is_same_v<T, Keyword>) {
          os << x.name;
        } else if constexpr (std::is_same_v<T, Query>) {
          write_query(os, x);
        } else if constexpr (std::is_same_v<T, QueryList>) {
          write_query_list(os, x);
        } else if constexpr (std::is_same_v<T, ParamArray>) {
          os << '[';
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (i > 0) os << ", ";
            write_value(os, x[i], depth);
          }
          os << ']';
        } else if constexpr (std::is_same_v<T, SketchBody>) {
          if (x.empty()) {
            os << "{}";
            return;
          }
          os << "{\n";
          for (const auto& e : x) {
            for (int i = 0; i <= depth; ++i) os << kIndent;
            write_entity(os, e, depth + 1);
            os << '\n';
          }
          for (int i = 0; i < depth; ++i) os << kIndent;
          os << '}';
        }
      },
      v.value);
}

void write_params(std::ostream& os, const Params& params, const std::vector<ParamSpec>& order,
                  int depth) {
  std::size_t written = 0;
  for (const auto& spec : order) {
    auto it = params.find(spec.name);
    if (it == params.end()) continue;
    os << ", " << spec.name << " = ";
    write_value(os, it->second, depth);
    ++written;
  }
  if (written == params.size()) return;
  // Parameters outside the schema (only possible for hand-built programs)
  // follow in name order so output stays deterministic.
  for (const auto& [name, value] : params) {
    bool known = false;
    for (const auto& spec : order) known = known || spec.name == name;
    if (known) continue;
    os << ", " << name << " = ";
    write_value(os, value, depth);
  }
}

}  // namespace

std::string emit_expression(const Expr& expr) {
  std::ostringstream os;
  write_expr(os, expr, 0, false);
  return os.str();
}

std::string emit_scalar(const Scalar& scalar) {
  if (scalar.is_literal()) return scalar.value().to_fixed(2);
  return emit_expression(scalar.expr);
}

std::string emit_query(const Query& query) {
  std::ostringstream os;
  write_query(os, query);
  return os.str();
}

std::string emit(const Program& program) {
  std::ostringstream os;
  for (const auto& f : program.features) {
    os << op_keyword(f.kind) << '(' << f.id.text();
    write_params(os, f.params, feature_schema(f.kind).params, 0);
    os << ");\n";
  }
  return os.str();
}

}  // namespace cadscript

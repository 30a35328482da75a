#include <algorithm>
#include <cctype>
#include <map>

#include "cadscript/analysis.hpp"
#include "cadscript/parser.hpp"
#include "cadscript/schema.hpp"

namespace cadscript {

namespace {

std::vector<std::string> op_keywords() {
  std::vector<std::string> out;
  for (OpKind k : all_op_kinds()) out.emplace_back(op_keyword(k));
  return out;
}

std::vector<std::string> entity_keywords() {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kEntityKindCount; ++i) {
    out.emplace_back(entity_keyword(static_cast<EntityKind>(i)));
  }
  return out;
}

bool is_query_type_token(const std::string& s) {
  if (s.empty() || !(std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string unescape(std::string_view lexeme) {
  std::string out;
  for (std::size_t i = 1; i + 1 < lexeme.size(); ++i) {
    if (lexeme[i] == '\\') {
      char e = lexeme[++i];
      out.push_back(e == 'n' ? '\n' : e);
    } else {
      out.push_back(lexeme[i]);
    }
  }
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, Dialect dialect)
      : dialect_(dialect), tokens_(tokenize(text, dialect)) {
    // Position for errors at end of input.
    int line = 1;
    int column = 1;
    for (char c : text) {
      if (c == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    eof_line_ = line;
    eof_column_ = column;
  }

  Program parse_program(std::string source_name) {
    Program program;
    program.source_name = std::move(source_name);
    while (!at_end()) {
      statement_pos_.push_back({peek_line(), peek_column()});
      program.features.push_back(parse_feature());
    }
    if (dialect_ == Dialect::Canonical) {
      for (const auto& d : validate_structure(program)) {
        if (d.severity != Severity::Error) continue;
        for (std::size_t i = 0; i < program.features.size(); ++i) {
          if (program.features[i].id == d.feature_id) {
            throw ParseError(d.message, statement_pos_[i].line, statement_pos_[i].column);
          }
        }
        throw ParseError(d.message, 1, 1);
      }
    }
    return program;
  }

  Expr parse_standalone_expression() {
    Expr e = parse_expr();
    if (!at_end()) fail("unexpected token '" + peek().lexeme + "'", {"end of expression"});
    return e;
  }

 private:
  // -- token helpers ------------------------------------------------------

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }
  int peek_line() const { return at_end() ? eof_line_ : peek().line; }
  int peek_column() const { return at_end() ? eof_column_ : peek().column; }

  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected = {}) const {
    throw ParseError(message, peek_line(), peek_column(), std::move(expected));
  }

  [[noreturn]] void fail_at(const Token& tok, const std::string& message,
                            std::vector<std::string> expected = {}) const {
    throw ParseError(message, tok.line, tok.column, std::move(expected));
  }

  std::string describe_next() const {
    return at_end() ? "end of input" : "'" + peek().lexeme + "'";
  }

  bool check_punct(char c) const {
    return !at_end() && peek().kind == TokenKind::Punctuation && peek().lexeme[0] == c;
  }

  bool check_keyword(std::string_view kw) const {
    return !at_end() && peek().kind == TokenKind::Keyword && peek().lexeme == kw;
  }

  const Token& expect_punct(char c) {
    if (!check_punct(c)) {
      fail("unexpected " + describe_next(), {"'" + std::string(1, c) + "'"});
    }
    return tokens_[pos_++];
  }

  const Token& expect_kind(TokenKind kind, const std::string& what) {
    if (at_end() || peek().kind != kind) fail("unexpected " + describe_next(), {what});
    return tokens_[pos_++];
  }

  // -- statements ---------------------------------------------------------

  Identifier parse_identifier(Identifier::Family family, const char* what) {
    const Token& tok = expect_kind(TokenKind::Identifier, what);
    Identifier id(tok.lexeme);
    if (dialect_ == Dialect::Canonical && id.family() != family) {
      fail_at(tok, "non-canonical identifier '" + tok.lexeme + "'", {what});
    }
    return id;
  }

  Feature parse_feature() {
    if (at_end() || peek().kind != TokenKind::Identifier) {
      fail("unexpected " + describe_next(), {"operation name"});
    }
    const Token& op_tok = tokens_[pos_];
    auto kind = op_kind_from_keyword(op_tok.lexeme);
    if (!kind) fail("unknown operation '" + op_tok.lexeme + "'", op_keywords());
    ++pos_;

    Feature feature;
    feature.kind = *kind;
    const FeatureSchema& schema = feature_schema(*kind);
    expect_punct('(');
    feature.id = parse_identifier(Identifier::Family::Feature, "feature identifier F<n>");
    while (check_punct(',')) {
      ++pos_;
      const Token& name_tok = expect_kind(TokenKind::Identifier, "parameter name");
      const ParamSpec* spec = schema.find(name_tok.lexeme);
      if (spec == nullptr) {
        std::vector<std::string> names;
        for (const auto& p : schema.params) names.push_back(p.name);
        fail_at(name_tok, "unknown parameter '" + name_tok.lexeme + "' for " + op_tok.lexeme, names);
      }
      if (feature.params.count(spec->name) != 0) {
        fail_at(name_tok, "duplicate parameter '" + spec->name + "'");
      }
      expect_punct('=');
      ParamValue value = parse_value(*spec);
      feature.params.emplace(spec->name, std::move(value));
    }
    expect_punct(')');
    std::vector<std::string> missing;
    for (const auto& spec : schema.params) {
      if (spec.required && feature.params.count(spec.name) == 0) missing.push_back("'" + spec.name + "'");
    }
    if (!missing.empty()) {
      std::string names = missing.front();
      for (std::size_t i = 1; i < missing.size(); ++i) names += ", " + missing[i];
      fail_at(op_tok, std::string(missing.size() == 1 ? "missing required parameter " : "missing required parameters ") +
                          names + " for " + op_tok.lexeme);
    }
    expect_punct(';');
    return feature;
  }

  SketchEntity parse_entity() {
    if (at_end() || peek().kind != TokenKind::Identifier) {
      fail("unexpected " + describe_next(), entity_keywords());
    }
    const Token& kind_tok = tokens_[pos_];
    auto kind = entity_kind_from_keyword(kind_tok.lexeme);
    if (!kind) fail("unknown sketch primitive '" + kind_tok.lexeme + "'", entity_keywords());
    ++pos_;

    SketchEntity entity;
    entity.kind = *kind;
    const EntitySchema& schema = entity_schema(*kind);
    expect_punct('(');
    entity.id = parse_identifier(Identifier::Family::SketchEntity, "sketch entity identifier S<n>");
    while (check_punct(',')) {
      ++pos_;
      const Token& name_tok = expect_kind(TokenKind::Identifier, "parameter name");
      const ParamSpec* spec = nullptr;
      std::size_t form_index = 0;
      for (std::size_t f = 0; f < schema.forms.size() && spec == nullptr; ++f) {
        spec = schema.forms[f].find(name_tok.lexeme);
        form_index = f;
      }
      if (spec == nullptr || (dialect_ == Dialect::Canonical && form_index != 0)) {
        std::vector<std::string> names;
        for (const auto& p : schema.forms.front().params) names.push_back(p.name);
        std::string why = spec == nullptr ? "unknown parameter '" : "implicit parameterization '";
        fail_at(name_tok, why + name_tok.lexeme + "' not allowed for " + kind_tok.lexeme, names);
      }
      if (entity.params.count(spec->name) != 0) {
        fail_at(name_tok, "duplicate parameter '" + spec->name + "'");
      }
      expect_punct('=');
      ParamValue value = parse_value(*spec);
      entity.params.emplace(spec->name, std::move(value));
    }
    expect_punct(')');
    if (!match_entity_form(entity)) {
      // Report against the form sharing the most parameter names.
      std::size_t best = 0;
      std::size_t best_hits = 0;
      for (std::size_t f = 0; f < schema.forms.size(); ++f) {
        std::size_t hits = 0;
        for (const auto& p : schema.forms[f].params) hits += entity.params.count(p.name);
        if (hits > best_hits) {
          best = f;
          best_hits = hits;
        }
      }
      auto problems = check_params(entity.params, schema.forms[best].params);
      fail_at(kind_tok, (problems.empty() ? std::string("invalid parameters") : problems.front()) +
                            " for " + kind_tok.lexeme);
    }
    expect_punct(';');
    return entity;
  }

  // -- values -------------------------------------------------------------

  ParamValue parse_value(const ParamSpec& spec) {
    switch (spec.type) {
      case ValueType::Length:
      case ValueType::Angle:
      case ValueType::Number:
        return parse_scalar(scalar_dimension(spec.type));
      case ValueType::Bool: {
        if (check_keyword("true") || check_keyword("false")) {
          return tokens_[pos_++].lexeme == "true";
        }
        fail("unexpected " + describe_next(), {"true", "false"});
      }
      case ValueType::Text:
        return Text{unescape(expect_kind(TokenKind::String, "string").lexeme)};
      case ValueType::Keyword:
        return parse_keyword(spec);
      case ValueType::Query:
        return parse_query();
      case ValueType::QueryList:
        return parse_query_list();
      case ValueType::ProfileRef:
        if (check_punct('[')) return parse_query_list();
        return parse_query();
      case ValueType::PlaneRef:
        if (check_keyword("makeQuery")) return parse_query();
        return parse_keyword(spec);
      case ValueType::Point2:
        return parse_vec(2, Dimension::Length);
      case ValueType::Direction2:
        return parse_vec(2, Dimension::None);
      case ValueType::Point3:
        return parse_vec(3, Dimension::Length);
      case ValueType::Direction3:
        return parse_vec(3, Dimension::None);
      case ValueType::PointArray: {
        expect_punct('[');
        ParamArray items;
        if (!check_punct(']')) {
          items.push_back(parse_vec(2, Dimension::Length));
          while (check_punct(',')) {
            ++pos_;
            items.push_back(parse_vec(2, Dimension::Length));
          }
        }
        expect_punct(']');
        return items;
      }
      case ValueType::SketchBody: {
        expect_punct('{');
        SketchBody body;
        while (!check_punct('}')) {
          if (at_end()) fail("unexpected end of input", {"'}'"});
          body.push_back(parse_entity());
        }
        expect_punct('}');
        return body;
      }
    }
    fail("unsupported parameter type");
  }

  ParamValue parse_keyword(const ParamSpec& spec) {
    if (at_end() || peek().kind != TokenKind::Identifier ||
        std::find(spec.keywords.begin(), spec.keywords.end(), peek().lexeme) == spec.keywords.end()) {
      std::string message = "unexpected " + describe_next();
      if (spec.name == "base") message = "unsupported plane construction " + describe_next();
      fail(message, spec.keywords);
    }
    return Keyword{tokens_[pos_++].lexeme};
  }

  Vec parse_vec(std::size_t n, Dimension dim) {
    expect_punct('(');
    Vec v;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) expect_punct(',');
      v.components.push_back(parse_scalar(dim));
    }
    expect_punct(')');
    return v;
  }

  Scalar parse_scalar(Dimension dim) {
    if (dialect_ == Dialect::Raw) return Scalar{parse_expr(), dim};
    bool negative = false;
    if (check_punct('-')) {
      ++pos_;
      negative = true;
    }
    const Token& tok = expect_kind(TokenKind::Number, "number");
    Decimal value = *Decimal::parse(tok.lexeme);
    if (negative) value = -value;
    if (!at_end() && peek().kind == TokenKind::Punctuation &&
        std::string_view("+-*/").find(peek().lexeme[0]) != std::string_view::npos) {
      fail("arithmetic expression not allowed", {"',' or ')'"});
    }
    return Scalar{Expr::literal(value, {tok.line, tok.column}), dim};
  }

  // expr := term (('+' | '-') term)*
  Expr parse_expr() {
    Expr lhs = parse_term();
    while (check_punct('+') || check_punct('-')) {
      const Token& op = tokens_[pos_++];
      Expr rhs = parse_term();
      lhs = Expr::binary(op.lexeme[0] == '+' ? Expr::Kind::Add : Expr::Kind::Sub, lhs, rhs,
                         {op.line, op.column});
    }
    return lhs;
  }

  // term := unary (('*' | '/') unary)*
  Expr parse_term() {
    Expr lhs = parse_unary();
    while (check_punct('*') || check_punct('/')) {
      const Token& op = tokens_[pos_++];
      Expr rhs = parse_unary();
      lhs = Expr::binary(op.lexeme[0] == '*' ? Expr::Kind::Mul : Expr::Kind::Div, lhs, rhs,
                         {op.line, op.column});
    }
    return lhs;
  }

  Expr parse_unary() {
    if (check_punct('-')) {
      const Token& op = tokens_[pos_++];
      Expr operand = parse_unary();
      if (operand.is_literal()) return Expr::literal(-operand.value(), {op.line, op.column});
      return Expr::negate(operand, {op.line, op.column});
    }
    return parse_primary();
  }

  Expr parse_primary() {
    if (at_end()) fail("unexpected end of input", {"number", "'('"});
    const Token& tok = peek();
    SourcePos pos{tok.line, tok.column};
    if (tok.kind == TokenKind::Number) {
      ++pos_;
      Expr value = Expr::literal(*Decimal::parse(tok.lexeme), pos);
      return with_unit_suffix(value);
    }
    if (tok.kind == TokenKind::UnitSuffix) {
      ++pos_;
      return Expr::unit(*unit_from_word(tok.lexeme), pos);
    }
    if (tok.kind == TokenKind::Keyword && tok.lexeme == "PI") {
      ++pos_;
      return Expr::pi(pos);
    }
    if (check_punct('(')) {
      ++pos_;
      Expr inner = parse_expr();
      expect_punct(')');
      return with_unit_suffix(inner);
    }
    fail("unexpected " + describe_next(), {"number", "unit", "PI", "'('"});
  }

  // A unit word directly after a number or parenthesized expression
  // multiplies it: `25.4 mm`, `(1 + 2) inch`.
  Expr with_unit_suffix(const Expr& value) {
    if (at_end() || peek().kind != TokenKind::UnitSuffix) return value;
    const Token& u = tokens_[pos_++];
    SourcePos pos{u.line, u.column};
    return Expr::binary(Expr::Kind::Mul, value, Expr::unit(*unit_from_word(u.lexeme), pos), pos);
  }

  Query parse_query() {
    if (!check_keyword("makeQuery")) fail("unexpected " + describe_next(), {"makeQuery"});
    ++pos_;
    expect_punct('(');
    Query q;
    const Token& id_tok = expect_kind(TokenKind::Identifier, "operation identifier");
    q.op_id = Identifier(id_tok.lexeme);
    if (dialect_ == Dialect::Canonical && !q.op_id.is_canonical()) {
      fail_at(id_tok, "non-canonical identifier '" + id_tok.lexeme + "'", {"F<n> or S<n>"});
    }
    expect_punct(',');
    const Token& type_tok = expect_kind(TokenKind::Identifier, "query type");
    if (!is_query_type_token(type_tok.lexeme)) {
      fail_at(type_tok, "query type must be an upper-case token");
    }
    q.query_type = type_tok.lexeme;
    expect_punct(',');
    const Token& entity_tok = expect_kind(TokenKind::Identifier, "entity type");
    auto et = entity_type_from_string(entity_tok.lexeme);
    if (!et) fail_at(entity_tok, "unknown entity type '" + entity_tok.lexeme + "'", {"VERTEX", "EDGE", "FACE", "BODY"});
    q.entity_type = *et;
    if (check_punct(',')) {
      ++pos_;
      expect_punct('[');
      if (!check_punct(']')) {
        q.disambiguation.push_back(parse_disambiguation());
        while (check_punct(',')) {
          ++pos_;
          q.disambiguation.push_back(parse_disambiguation());
        }
      }
      expect_punct(']');
    }
    expect_punct(')');
    return q;
  }

  Disambiguation parse_disambiguation() {
    Disambiguation d;
    if (check_keyword("originalSet")) {
      d.kind = DisambiguationKind::OriginalSet;
    } else if (check_keyword("topology")) {
      d.kind = DisambiguationKind::Topology;
    } else {
      fail("unexpected " + describe_next(), {"originalSet", "topology"});
    }
    ++pos_;
    expect_punct('(');
    d.queries.push_back(parse_query());
    while (check_punct(',')) {
      ++pos_;
      d.queries.push_back(parse_query());
    }
    expect_punct(')');
    return d;
  }

  QueryList parse_query_list() {
    expect_punct('[');
    QueryList list;
    if (!check_punct(']')) {
      list.push_back(parse_query());
      while (check_punct(',')) {
        ++pos_;
        list.push_back(parse_query());
      }
    }
    expect_punct(']');
    return list;
  }

  Dialect dialect_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int eof_line_ = 1;
  int eof_column_ = 1;
  std::vector<SourcePos> statement_pos_;
};

}  // namespace

Program parse(std::string_view text, Dialect dialect, std::string source_name) {
  Parser parser(text, dialect);
  return parser.parse_program(std::move(source_name));
}

Expr parse_expression(std::string_view text) {
  Parser parser(text, Dialect::Raw);
  return parser.parse_standalone_expression();
}

}  // namespace cadscript

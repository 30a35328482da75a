#pragma once

// Text <-> Program conversion for the FeatureScript subset.
//
// The Canonical dialect is what `emit` produces: canonical identifiers,
// literal scalars in mm/deg, explicit sketch primitives. The Raw dialect is a
// superset accepting opaque identifiers, unit words, arithmetic expressions
// and implicit sketch parameterizations. The grammar is in docs/grammar.ebnf.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cadscript/ast.hpp"

namespace cadscript {

enum class Dialect { Canonical, Raw };

std::string_view to_string(Dialect dialect);

enum class TokenKind { Identifier, Number, String, UnitSuffix, Punctuation, Keyword };

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Identifier;
  std::string lexeme;  // exact source text
  int line = 1;        // 1-based
  int column = 1;      // 1-based, in bytes
  std::size_t offset = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int column, std::vector<std::string> expected = {});

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::string message_;
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

// Whitespace and `//` comments are skipped; every other byte belongs to
// exactly one token. Throws ParseError on an illegal character, an
// unterminated string, or (Canonical) a unit word.
std::vector<Token> tokenize(std::string_view text, Dialect dialect);

// Throws ParseError locating the first offending token. A Canonical parse
// additionally enforces validate_structure.
Program parse(std::string_view text, Dialect dialect, std::string source_name = {});

// Raw-dialect scalar expression, e.g. "2 * 5 + 1.5" or "1 * inch".
Expr parse_expression(std::string_view text);

// Deterministic canonical text: one statement per feature, parameters in
// schema order, scalars with exactly two decimals.
std::string emit(const Program& program);

std::string emit_query(const Query& query);
std::string emit_expression(const Expr& expr);
// Scalar as it would appear in a statement.
std::string emit_scalar(const Scalar& scalar);

}  // namespace cadscript

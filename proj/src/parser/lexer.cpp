#include <array>
#include <cctype>
#include <sstream>

#include "cadscript/parser.hpp"

namespace cadscript {

namespace {

constexpr std::array<std::string_view, 6> kKeywords = {
    "true", "false", "makeQuery", "originalSet", "topology", "PI"};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string format_error(const std::string& message, int line, int column,
                         const std::vector<std::string>& expected) {
  std::ostringstream os;
  os << line << ":" << column << ": " << message;
  if (!expected.empty()) {
    os << " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) os << (i + 1 == expected.size() ? " or " : ", ");
      os << expected[i];
    }
    os << ")";
  }
  return os.str();
}

}  // namespace

std::string_view to_string(Dialect dialect) {
  return dialect == Dialect::Canonical ? "canonical" : "raw";
}

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::UnitSuffix: return "unit-suffix";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Keyword: return "keyword";
  }
  return "";
}

ParseError::ParseError(std::string message, int line, int column, std::vector<std::string> expected)
    : std::runtime_error(format_error(message, line, column, expected)),
      message_(std::move(message)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

std::vector<Token> tokenize(std::string_view text, Dialect dialect) {
  std::vector<Token> tokens;
  int line = 1;
  int column = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    }
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }

    Token tok;
    tok.line = line;
    tok.column = column;
    tok.offset = i;
    std::size_t start = i;

    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      std::string_view word = text.substr(i, j - i);
      if (unit_from_word(word)) {
        if (dialect == Dialect::Canonical) {
          throw ParseError("unit suffix not allowed", line, column);
        }
        tok.kind = TokenKind::UnitSuffix;
      } else {
        tok.kind = TokenKind::Identifier;
        for (auto kw : kKeywords) {
          if (kw == word) tok.kind = TokenKind::Keyword;
        }
      }
      advance(j - i);
    } else if (is_digit(c)) {
      std::size_t j = i;
      while (j < text.size() && is_digit(text[j])) ++j;
      if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
        ++j;
        while (j < text.size() && is_digit(text[j])) ++j;
      }
      if (j < text.size() && is_ident_start(text[j])) {
        // `25.4mm` lexes as a number followed by a unit word.
        std::size_t k = j;
        while (k < text.size() && is_ident_char(text[k])) ++k;
        if (!unit_from_word(text.substr(j, k - j))) {
          throw ParseError("malformed number", line, column);
        }
      }
      tok.kind = TokenKind::Number;
      advance(j - i);
    } else if (c == '"') {
      tok.kind = TokenKind::String;
      advance(1);
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\') {
          if (i + 1 >= text.size()) break;
          char e = text[i + 1];
          if (e != '\\' && e != '"' && e != 'n') {
            throw ParseError("invalid escape sequence", line, column);
          }
          advance(2);
          continue;
        }
        if (text[i] == '"') {
          advance(1);
          closed = true;
          break;
        }
        advance(1);
      }
      if (!closed) throw ParseError("unterminated string", tok.line, tok.column);
    } else if (std::string_view("(){}[],;=+-*/").find(c) != std::string_view::npos) {
      tok.kind = TokenKind::Punctuation;
      advance(1);
    } else {
      std::string shown = std::isprint(static_cast<unsigned char>(c))
                              ? std::string(1, c)
                              : "\\x" + std::to_string(static_cast<unsigned char>(c));
      throw ParseError("illegal character '" + shown + "'", line, column);
    }
    tok.lexeme = std::string(text.substr(start, i - start));
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

}  // namespace cadscript

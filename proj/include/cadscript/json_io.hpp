#pragma once

// JSON form of the AST. Field names follow the C++ type names; scalars are
// stored as decimal strings so nothing is lost to binary floating point.

#include <stdexcept>

#include <json.hpp>

#include "cadscript/ast.hpp"

namespace cadscript {

class JsonFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::ordered_json to_json(const Program& program);
nlohmann::ordered_json to_json(const Query& query);

// Throws JsonFormatError on a malformed document.
Program program_from_json(const nlohmann::ordered_json& doc);

}  // namespace cadscript

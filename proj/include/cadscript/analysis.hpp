#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cadscript/ast.hpp"

namespace cadscript {

enum class Severity { Error, Warning };

std::string_view to_string(Severity severity);

struct Diagnostic {
  Identifier feature_id;
  Severity severity = Severity::Error;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// Checks identifier uniqueness, forward-only references, parameter schemas
// and sketch-entity invariants. Returns an empty list for a well-formed
// program.
std::vector<Diagnostic> validate_structure(const Program& program);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

enum class EdgeReason { QueryReference, BodyConsumption, PlaneReference };

std::string_view to_string(EdgeReason reason);

struct DepEdge {
  Identifier consumer;
  Identifier producer;
  EdgeReason reason = EdgeReason::QueryReference;

  friend bool operator==(const DepEdge&, const DepEdge&) = default;
};

struct DepGraph {
  std::vector<Identifier> nodes;  // feature ids in program order
  std::vector<DepEdge> edges;     // unique per (consumer, producer)

  bool has_edge(const Identifier& consumer, const Identifier& producer) const;
  std::vector<Identifier> producers_of(const Identifier& consumer) const;
  bool is_acyclic() const;
};

class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(Identifier id)
      : std::runtime_error("unresolved identifier '" + id.text() + "'"), id_(std::move(id)) {}
  const Identifier& identifier() const { return id_; }

 private:
  Identifier id_;
};

// Feature-level dependency graph. A query whose op_id names a sketch entity
// creates an edge to the sketch that owns the entity. Throws AnalysisError
// for an op_id that does not resolve.
DepGraph dependency_graph(const Program& program);

// True when `kind` consumes the bodies named by BODY queries in its target
// lists.
bool consumes_bodies(OpKind kind);

}  // namespace cadscript

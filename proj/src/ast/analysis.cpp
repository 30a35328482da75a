#include "cadscript/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cadscript/schema.hpp"

namespace cadscript {

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

std::string_view to_string(EdgeReason reason) {
  switch (reason) {
    case EdgeReason::QueryReference: return "query-reference";
    case EdgeReason::BodyConsumption: return "implicit-body-consumption";
    case EdgeReason::PlaneReference: return "plane-reference";
  }
  return "";
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool consumes_bodies(OpKind kind) {
  switch (kind) {
    case OpKind::Boolean:
    case OpKind::DeleteBody:
    case OpKind::CircularPattern:
    case OpKind::Mirror:
    case OpKind::Transform:
      return true;
    default:
      return false;
  }
}

namespace {

std::optional<std::pair<Decimal, Decimal>> literal_point(const ParamValue* v) {
  if (v == nullptr || !v->is<Vec>()) return std::nullopt;
  const auto& c = v->as<Vec>().components;
  if (c.size() != 2 || !c[0].is_literal() || !c[1].is_literal()) return std::nullopt;
  return std::make_pair(c[0].value(), c[1].value());
}

std::optional<Decimal> literal_scalar(const ParamValue* v) {
  if (v == nullptr || !v->is<Scalar>() || !v->as<Scalar>().is_literal()) return std::nullopt;
  return v->as<Scalar>().value();
}

const ParamValue* entity_param(const SketchEntity& e, std::string_view name) {
  auto it = e.params.find(name);
  return it == e.params.end() ? nullptr : &it->second;
}

void check_entity(const SketchEntity& e, const Identifier& owner, std::vector<Diagnostic>& out) {
  auto error = [&](std::string message) {
    out.push_back({owner, Severity::Error, "sketch entity '" + e.id.text() + "': " + std::move(message)});
  };
  if (!match_entity_form(e)) {
    auto problems = check_params(e.params, entity_schema(e.kind).forms.front().params);
    error(problems.empty() ? "parameters match no form" : problems.front());
    return;
  }
  for (const char* name : {"radius", "majorRadius", "minorRadius", "length"}) {
    if (auto r = literal_scalar(entity_param(e, name)); r && *r <= Decimal(0)) {
      error(std::string(name) + " must be positive");
    }
  }
  if (e.kind == EntityKind::Line) {
    auto a = literal_point(entity_param(e, "start"));
    auto b = literal_point(entity_param(e, "end"));
    if (a && b && *a == *b) error("zero-length line");
  }
  if (e.kind == EntityKind::Arc) {
    auto a = literal_point(entity_param(e, "start"));
    auto m = literal_point(entity_param(e, "mid"));
    auto b = literal_point(entity_param(e, "end"));
    if (a && m && b) {
      Decimal cross = (m->first - a->first) * (b->second - a->second) -
                      (m->second - a->second) * (b->first - a->first);
      if (cross.is_zero()) error("arc points are collinear");
    }
  }
  if (e.kind == EntityKind::Bezier || e.kind == EntityKind::Spline) {
    const ParamValue* pts = entity_param(e, "points");
    if (pts != nullptr && pts->is<ParamArray>() && pts->as<ParamArray>().size() < 2) {
      error("needs at least two points");
    }
  }
}

EdgeReason reason_for(const Feature& f, std::string_view param, const Query& q, bool nested) {
  if (nested) return EdgeReason::QueryReference;
  if (f.kind == OpKind::Sketch && param == "plane") return EdgeReason::PlaneReference;
  if (consumes_bodies(f.kind) && q.entity_type == EntityType::Body &&
      (param == "targets" || param == "tools" || param == "entities")) {
    return EdgeReason::BodyConsumption;
  }
  return EdgeReason::QueryReference;
}

}  // namespace

std::vector<Diagnostic> validate_structure(const Program& program) {
  std::vector<Diagnostic> out;

  // Identifier -> index of the defining feature.
  std::map<Identifier, std::size_t> defined;
  for (std::size_t i = 0; i < program.features.size(); ++i) {
    const Feature& f = program.features[i];
    if (!defined.emplace(f.id, i).second) {
      out.push_back({f.id, Severity::Error, "duplicate identifier '" + f.id.text() + "'"});
    }
    for (const auto& e : f.entities()) {
      if (!defined.emplace(e.id, i).second) {
        out.push_back({f.id, Severity::Error, "duplicate identifier '" + e.id.text() + "'"});
      }
    }
  }

  for (std::size_t i = 0; i < program.features.size(); ++i) {
    const Feature& f = program.features[i];
    for (auto& problem : check_params(f.params, feature_schema(f.kind).params)) {
      out.push_back({f.id, Severity::Error, std::move(problem)});
    }
    for (const auto& e : f.entities()) check_entity(e, f.id, out);

    std::set<Identifier> reported;
    for_each_query(f, [&](const Query& q) {
      if (!reported.insert(q.op_id).second) return;
      auto it = defined.find(q.op_id);
      if (it == defined.end()) {
        out.push_back({f.id, Severity::Error, "unresolved reference '" + q.op_id.text() + "'"});
      } else if (it->second >= i) {
        out.push_back({f.id, Severity::Error, "forward reference to '" + q.op_id.text() + "'"});
      }
    });
  }
  return out;
}

bool DepGraph::has_edge(const Identifier& consumer, const Identifier& producer) const {
  return std::any_of(edges.begin(), edges.end(), [&](const DepEdge& e) {
    return e.consumer == consumer && e.producer == producer;
  });
}

std::vector<Identifier> DepGraph::producers_of(const Identifier& consumer) const {
  std::vector<Identifier> out;
  for (const auto& e : edges) {
    if (e.consumer == consumer) out.push_back(e.producer);
  }
  return out;
}

bool DepGraph::is_acyclic() const {
  // Kahn's algorithm over the node set.
  std::map<Identifier, std::size_t> indegree;
  for (const auto& n : nodes) indegree[n] = 0;
  for (const auto& e : edges) ++indegree[e.consumer];
  std::vector<Identifier> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.push_back(n);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    Identifier n = ready.back();
    ready.pop_back();
    ++visited;
    for (const auto& e : edges) {
      if (e.producer == n && --indegree[e.consumer] == 0) ready.push_back(e.consumer);
    }
  }
  return visited == indegree.size();
}

DepGraph dependency_graph(const Program& program) {
  DepGraph graph;
  std::map<Identifier, Identifier> owner;
  for (const auto& f : program.features) {
    graph.nodes.push_back(f.id);
    owner.emplace(f.id, f.id);
    for (const auto& e : f.entities()) owner.emplace(e.id, f.id);
  }

  std::set<std::pair<Identifier, Identifier>> seen;
  for (const auto& f : program.features) {
    for (const auto& [name, value] : f.params) {
      auto visit_top = [&](const Query& top) {
        bool nested = false;
        for_each_query(top, [&](const Query& q) {
          auto it = owner.find(q.op_id);
          if (it == owner.end()) throw AnalysisError(q.op_id);
          if (seen.emplace(f.id, it->second).second) {
            graph.edges.push_back({f.id, it->second, reason_for(f, name, q, nested)});
          }
          nested = true;
        });
      };
      if (value.is<Query>()) {
        visit_top(value.as<Query>());
      } else if (value.is<QueryList>()) {
        for (const auto& q : value.as<QueryList>()) visit_top(q);
      } else {
        for_each_query(value, [&](const Query& q) {
          auto it = owner.find(q.op_id);
          if (it == owner.end()) throw AnalysisError(q.op_id);
          if (seen.emplace(f.id, it->second).second) {
            graph.edges.push_back({f.id, it->second, EdgeReason::QueryReference});
          }
        });
      }
    }
  }
  return graph;
}

}  // namespace cadscript

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "cadscript/normalize.hpp"
#include "cadscript/parser.hpp"
#include "cadscript/schema.hpp"

namespace cadscript {

namespace {

bool is_geometry_kind(OpKind kind) {
  switch (kind) {
    case OpKind::Sketch:
    case OpKind::ConstructionPlane:
    case OpKind::DeleteBody:
      return false;
    default:
      return true;
  }
}

// -- simplify_operations ------------------------------------------------------

bool simplify_extrude(Feature& f) {
  bool changed = false;
  auto flag = [&](const char* name) {
    const ParamValue* v = f.param(name);
    return v != nullptr && v->is<bool>() && v->as<bool>();
  };
  const ParamValue* depth = f.param("depth");
  const ParamValue* second = f.param("secondDepth");
  // Equal extents on both sides of the sketch plane are the midplane form.
  if (!flag("midplane") && depth != nullptr && second != nullptr && depth->is<Scalar>() &&
      second->is<Scalar>() && depth->as<Scalar>().is_literal() && *depth == *second &&
      !depth->as<Scalar>().value().is_zero()) {
    Decimal total = depth->as<Scalar>().value() * Decimal(2);
    f.params["depth"] = Scalar::length(total);
    f.params["midplane"] = true;
    f.params.erase("secondDepth");
    changed = true;
  }
  if (flag("midplane")) {
    // Direction and a second extent have no effect on a symmetric extrude.
    changed |= f.params.erase("oppositeDirection") > 0;
    changed |= f.params.erase("secondDepth") > 0;
  }
  return changed;
}

bool drop_defaults(Feature& f) {
  bool changed = false;
  for (const auto& spec : feature_schema(f.kind).params) {
    if (!spec.default_value) continue;
    auto it = f.params.find(spec.name);
    if (it != f.params.end() && it->second == *spec.default_value) {
      f.params.erase(it);
      changed = true;
    }
  }
  return changed;
}

// Target of a Boolean that merely wraps one body, or nullopt.
std::optional<Identifier> trivial_union_target(const Feature& f) {
  if (f.kind != OpKind::Boolean) return std::nullopt;
  const ParamValue* mode = f.param("mode");
  const ParamValue* targets = f.param("targets");
  const ParamValue* tools = f.param("tools");
  if (mode == nullptr || !mode->is<Keyword>() || mode->as<Keyword>().name != "UNION") return std::nullopt;
  if (targets == nullptr || !targets->is<QueryList>() || targets->as<QueryList>().size() != 1) {
    return std::nullopt;
  }
  if (tools != nullptr && (!tools->is<QueryList>() || !tools->as<QueryList>().empty())) return std::nullopt;
  const Query& q = targets->as<QueryList>().front();
  if (q.entity_type != EntityType::Body || !q.disambiguation.empty()) return std::nullopt;
  return q.op_id;
}

// -- eliminate_dead_code ----------------------------------------------------

std::set<Identifier> backward_closure(const DepGraph& graph, std::vector<Identifier> seeds) {
  std::set<Identifier> live(seeds.begin(), seeds.end());
  while (!seeds.empty()) {
    Identifier n = std::move(seeds.back());
    seeds.pop_back();
    for (const auto& e : graph.edges) {
      if (e.consumer == n && live.insert(e.producer).second) seeds.push_back(e.producer);
    }
  }
  return live;
}

// -- canonicalize_queries ---------------------------------------------------

using QueryKey = std::tuple<int, std::size_t, std::string, std::string, std::string>;

QueryKey query_key(const Query& q) {
  return {static_cast<int>(q.op_id.family()), q.op_id.index().value_or(0), q.op_id.text(),
          q.query_type, emit_query(q)};
}

std::string disambiguation_key(const Disambiguation& d) {
  std::string key(to_string(d.kind));
  for (const auto& q : d.queries) key += "|" + emit_query(q);
  return key;
}

class QueryCanonicalizer {
 public:
  QueryCanonicalizer(const Program& program, PassEntry* entry) : program_(program), entry_(entry) {}

  bool run(Feature& f) {
    bool changed = false;
    for (auto& [name, value] : f.params) {
      if (value.is<Query>()) {
        changed |= top_level(f, value.as<Query>());
      } else if (value.is<QueryList>()) {
        for (auto& q : value.as<QueryList>()) changed |= top_level(f, q);
      }
    }
    return changed;
  }

 private:
  bool top_level(const Feature& owner, Query& q) {
    Query before = q;
    canonicalize(q);
    warn_if_ambiguous(owner, q);
    return !(before == q);
  }

  void canonicalize(Query& q) {
    for (auto& d : q.disambiguation) {
      for (auto& nested : d.queries) canonicalize(nested);
      std::sort(d.queries.begin(), d.queries.end(),
                [](const Query& a, const Query& b) { return query_key(a) < query_key(b); });
      d.queries.erase(std::unique(d.queries.begin(), d.queries.end()), d.queries.end());
    }
    std::sort(q.disambiguation.begin(), q.disambiguation.end(),
              [](const Disambiguation& a, const Disambiguation& b) {
                return disambiguation_key(a) < disambiguation_key(b);
              });
    q.disambiguation.erase(std::unique(q.disambiguation.begin(), q.disambiguation.end()),
                           q.disambiguation.end());
    augment_region_query(q);
  }

  // A region query on a sketch with several primitives names the primitives
  // that bound the region.
  void augment_region_query(Query& q) {
    if (q.query_type != "SKETCH_REGION" || !q.disambiguation.empty()) return;
    const Feature* sketch = program_.find_feature(q.op_id);
    if (sketch == nullptr || sketch->kind != OpKind::Sketch || sketch->entities().size() < 2) return;
    Disambiguation d{DisambiguationKind::OriginalSet, {}};
    for (const auto& e : sketch->entities()) {
      EntityType type = e.kind == EntityKind::Text ? EntityType::Face : EntityType::Edge;
      d.queries.push_back(Query{e.id, "SKETCH_ENTITY", type, {}});
    }
    std::sort(d.queries.begin(), d.queries.end(),
              [](const Query& a, const Query& b) { return query_key(a) < query_key(b); });
    q.disambiguation.push_back(std::move(d));
  }

  void warn_if_ambiguous(const Feature& owner, const Query& q) {
    if (entry_ == nullptr || !q.disambiguation.empty() || q.entity_type == EntityType::Body) return;
    const Feature* producer = program_.find_feature(q.op_id);
    if (producer == nullptr || producer->kind == OpKind::Sketch ||
        producer->kind == OpKind::ConstructionPlane) {
      return;
    }
    entry_->diagnostics.push_back(
        {owner.id, Severity::Warning,
         "query " + emit_query(q) + " has no disambiguation; the candidate set cannot be narrowed"});
  }

  const Program& program_;
  PassEntry* entry_;
};

}  // namespace

Program simplify_operations(const Program& program, PassEntry* entry) {
  Program out;
  out.source_name = program.source_name;
  std::map<Identifier, Identifier> redirect;
  for (const auto& original : program.features) {
    Feature f = original;
    bool changed = false;
    if (!redirect.empty()) {
      transform_queries(f, [&](Query& q) {
        auto it = redirect.find(q.op_id);
        if (it != redirect.end()) {
          q.op_id = it->second;
          changed = true;
        }
      });
    }
    if (auto target = trivial_union_target(f)) {
      Identifier to = *target;
      if (auto it = redirect.find(to); it != redirect.end()) to = it->second;
      redirect[f.id] = to;
      if (entry != nullptr) {
        ++entry->features_changed;
        ++entry->entities_removed;
        entry->notes.push_back("single-target union " + f.id.text() + " folded into " + to.text());
      }
      continue;
    }
    if (f.kind == OpKind::Extrude) changed |= simplify_extrude(f);
    changed |= drop_defaults(f);
    if (changed && entry != nullptr) ++entry->features_changed;
    out.features.push_back(std::move(f));
  }
  return out;
}

Program eliminate_dead_code(const Program& program, PassEntry* entry) {
  DepGraph graph;
  try {
    graph = dependency_graph(program);
  } catch (const AnalysisError& e) {
    throw PassError(kEliminateDeadCode, e.what());
  }

  std::map<Identifier, const Feature*> by_id;
  for (const auto& f : program.features) by_id[f.id] = &f;
  auto owner_of = [&](const Identifier& id) -> std::optional<Identifier> {
    auto idx = program.owner_index(id);
    if (!idx) return std::nullopt;
    return program.features[*idx].id;
  };

  // Bodies removed by a DeleteBody, keyed by producing feature.
  std::set<Identifier> deleted;
  for (const auto& f : program.features) {
    if (f.kind != OpKind::DeleteBody) continue;
    const ParamValue* targets = f.param("entities");
    if (targets == nullptr || !targets->is<QueryList>()) continue;
    for (const auto& q : targets->as<QueryList>()) {
      if (q.entity_type != EntityType::Body) continue;
      if (auto owner = owner_of(q.op_id)) deleted.insert(*owner);
    }
  }

  std::vector<Identifier> roots;
  for (const auto& f : program.features) {
    if (is_geometry_kind(f.kind) && deleted.count(f.id) == 0) roots.push_back(f.id);
  }
  std::set<Identifier> live = backward_closure(graph, roots);

  // A DeleteBody matters only when the body it removes fed something that
  // survives.
  std::vector<Identifier> live_deletes;
  for (const auto& f : program.features) {
    if (f.kind != OpKind::DeleteBody) continue;
    for (const auto& producer : graph.producers_of(f.id)) {
      if (live.count(producer) != 0) {
        live_deletes.push_back(f.id);
        break;
      }
    }
  }
  for (const auto& id : live_deletes) {
    auto more = backward_closure(graph, {id});
    live.insert(more.begin(), more.end());
  }

  // Sketch entities referenced by surviving features.
  std::set<Identifier> whole_sketch;
  std::set<Identifier> used_entities;
  for (const auto& f : program.features) {
    if (live.count(f.id) == 0) continue;
    for_each_query(f, [&](const Query& q) {
      const Feature* target = by_id.count(q.op_id) ? by_id[q.op_id] : nullptr;
      if (target == nullptr) {
        used_entities.insert(q.op_id);
        return;
      }
      if (target->kind != OpKind::Sketch) return;
      bool names_entities = false;
      for (const auto& d : q.disambiguation) {
        for (const auto& nested : d.queries) {
          for_each_query(nested, [&](const Query& n) {
            if (owner_of(n.op_id) == std::optional<Identifier>(target->id) && n.op_id != target->id) {
              names_entities = true;
            }
          });
        }
      }
      if (!names_entities) whole_sketch.insert(target->id);
    });
  }

  Program out;
  out.source_name = program.source_name;
  for (const auto& f : program.features) {
    if (live.count(f.id) == 0) {
      if (entry != nullptr) {
        ++entry->entities_removed;
        entry->notes.push_back("removed feature " + f.id.text());
      }
      continue;
    }
    Feature kept = f;
    if (SketchBody* body = kept.mutable_entities(); body != nullptr && whole_sketch.count(f.id) == 0) {
      std::size_t before = body->size();
      body->erase(std::remove_if(body->begin(), body->end(),
                                 [&](const SketchEntity& e) {
                                   bool dead = used_entities.count(e.id) == 0;
                                   if (dead && entry != nullptr) {
                                     entry->notes.push_back("removed sketch entity " + e.id.text());
                                   }
                                   return dead;
                                 }),
                  body->end());
      if (body->size() != before && entry != nullptr) {
        entry->entities_removed += before - body->size();
        ++entry->features_changed;
      }
    }
    out.features.push_back(std::move(kept));
  }
  return out;
}

RenameResult rename_identifiers(const Program& program, PassEntry* entry) {
  RenameResult result;
  std::size_t next_entity = 0;
  for (std::size_t i = 0; i < program.features.size(); ++i) {
    const Feature& f = program.features[i];
    result.mapping.emplace(f.id, Identifier::feature(i));
    for (const auto& e : f.entities()) result.mapping.emplace(e.id, Identifier::sketch_entity(next_entity++));
  }
  auto rename = [&](Identifier& id) {
    auto it = result.mapping.find(id);
    if (it != result.mapping.end()) id = it->second;
  };

  result.program.source_name = program.source_name;
  for (const auto& original : program.features) {
    Feature f = original;
    rename(f.id);
    if (SketchBody* body = f.mutable_entities()) {
      for (auto& e : *body) rename(e.id);
    }
    transform_queries(f, [&](Query& q) { rename(q.op_id); });
    if (entry != nullptr && !(f == original)) ++entry->features_changed;
    result.program.features.push_back(std::move(f));
  }
  if (entry != nullptr) {
    for (const auto& [from, to] : result.mapping) {
      if (from != to) entry->identifiers_renamed[from.text()] = to.text();
    }
  }
  return result;
}

Program canonicalize_queries(const Program& program, PassEntry* entry) {
  Program out = program;
  QueryCanonicalizer canon(program, entry);
  for (auto& f : out.features) {
    if (canon.run(f) && entry != nullptr) ++entry->features_changed;
  }
  return out;
}

}  // namespace cadscript

#include "cadscript/geom/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cadscript/schema.hpp"

namespace cadscript::geom {

std::string_view to_string(InterpretReason reason) {
  switch (reason) {
    case InterpretReason::UnsupportedOperation:
      return "unsupported-operation";
    case InterpretReason::OpenProfile:
      return "open-profile";
    case InterpretReason::SelfIntersectingProfile:
      return "self-intersecting-profile";
    case InterpretReason::EmptyResult:
      return "empty-result";
  }
  return "unknown";
}

InterpretError::InterpretError(Identifier feature, InterpretReason reason, std::string detail)
    : std::runtime_error((feature.empty() ? std::string() : feature.text() + ": ") +
                         std::string(to_string(reason)) + ": " + detail),
      feature_(std::move(feature)),
      reason_(reason),
      detail_(std::move(detail)) {}

namespace {

const ParamValue& param_or_default(const Feature& f, std::string_view name) {
  if (const ParamValue* v = f.param(name)) return *v;
  const ParamSpec* spec = feature_schema(f.kind).find(name);
  if (spec == nullptr || !spec->default_value) {
    throw InterpretError(f.id, InterpretReason::UnsupportedOperation, "missing parameter '" + std::string(name) + "'");
  }
  return *spec->default_value;
}

double number(const Feature& f, std::string_view name) {
  const Scalar& s = param_or_default(f, name).as<Scalar>();
  if (!s.is_literal()) throw InterpretError(f.id, InterpretReason::UnsupportedOperation, "non-literal value");
  return s.value().to_double();
}

bool flag(const Feature& f, std::string_view name) { return param_or_default(f, name).as<bool>(); }

QueryList queries(const ParamValue& v) {
  if (v.is<Query>()) return {v.as<Query>()};
  return v.as<QueryList>();
}

Vec3 rotate_about(Vec3 v, Vec3 axis, double radians) {
  // Rodrigues' formula for a unit axis.
  double c = std::cos(radians), s = std::sin(radians);
  return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1 - c));
}

struct Profile {
  const Feature* sketch = nullptr;
  std::set<Identifier> only;
};

Profile resolve_profile(const Feature& extrude, const Query& q, const Program& program) {
  if (const SketchEntity* e = program.find_entity(q.op_id)) {
    const Feature& owner = program.features[*program.owner_index(q.op_id)];
    (void)e;
    return {&owner, {q.op_id}};
  }
  const Feature* f = program.find_feature(q.op_id);
  if (f == nullptr || f->kind != OpKind::Sketch) {
    throw InterpretError(extrude.id, InterpretReason::UnsupportedOperation,
                         "profile " + q.op_id.text() + " is not a sketch");
  }
  Profile p{f, {}};
  for (const auto& d : q.disambiguation) {
    if (d.kind != DisambiguationKind::OriginalSet) {
      throw InterpretError(extrude.id, InterpretReason::UnsupportedOperation, "topology-selected profile");
    }
    for (const auto& inner : d.queries) {
      if (program.find_entity(inner.op_id) == nullptr ||
          &program.features[*program.owner_index(inner.op_id)] != f) {
        throw InterpretError(extrude.id, InterpretReason::UnsupportedOperation,
                             "profile selection " + inner.op_id.text() + " is not in " + f->id.text());
      }
      p.only.insert(inner.op_id);
    }
  }
  return p;
}

std::size_t find_body(const std::vector<Body>& bodies, const Feature& user, const Query& q) {
  if (q.entity_type != EntityType::Body) {
    throw InterpretError(user.id, InterpretReason::UnsupportedOperation, "query on a non-body entity");
  }
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto& ids = bodies[i].ids;
    if (std::find(ids.begin(), ids.end(), q.op_id) != ids.end()) return i;
  }
  throw InterpretError(user.id, InterpretReason::UnsupportedOperation, "no body produced by " + q.op_id.text());
}

void check_body(const Feature& f, const Mesh& mesh) {
  auto problems = check_mesh(mesh);
  if (!problems.empty()) throw InterpretError(f.id, InterpretReason::EmptyResult, problems.front());
}

Mesh extrude_feature(const Feature& f, const Program& program, const InterpretConfig& config) {
  if (number(f, "draft") != 0) throw InterpretError(f.id, InterpretReason::UnsupportedOperation, "drafted extrude");
  double d = number(f, "depth");
  double second = number(f, "secondDepth");
  if (!(d > 0) || second < 0) throw InterpretError(f.id, InterpretReason::EmptyResult, "non-positive depth");
  double from = 0, to = d;
  if (flag(f, "midplane")) {
    from = -d / 2;
    to = d / 2;
  } else {
    from = -second;
    if (flag(f, "oppositeDirection")) {
      std::swap(from, to);
      from = -from;
      to = -to;
    }
  }
  Mesh mesh;
  for (const auto& q : queries(param_or_default(f, "profile"))) {
    Profile p = resolve_profile(f, q, program);
    Plane plane = resolve_plane(*p.sketch, program);
    std::vector<Region> regions;
    try {
      regions = build_regions(*p.sketch, config.segments_per_circle, p.only);
    } catch (const InterpretError& e) {
      throw InterpretError(f.id, e.reason(), e.feature().text() + ": " + e.detail());
    }
    if (regions.empty()) throw InterpretError(f.id, InterpretReason::EmptyResult, "profile has no closed region");
    for (const auto& r : regions) {
      try {
        mesh.append(extrude_region(r, plane, from, to));
      } catch (const InterpretError& e) {
        throw InterpretError(f.id, e.reason(), e.detail());
      }
    }
  }
  check_body(f, mesh);
  return mesh;
}

}  // namespace

Plane principal_plane(const std::string& name) {
  if (name == "XY") return {{}, {0, 0, 1}, {1, 0, 0}};
  if (name == "XZ") return {{}, {0, -1, 0}, {1, 0, 0}};
  if (name == "YZ") return {{}, {1, 0, 0}, {0, 1, 0}};
  throw std::invalid_argument("unknown principal plane '" + name + "'");
}

Plane resolve_plane(const Feature& feature, const Program& program) {
  if (feature.kind == OpKind::ConstructionPlane) {
    Plane base = principal_plane(param_or_default(feature, "base").as<Keyword>().name);
    double angle = number(feature, "angle") * std::numbers::pi / 180;
    double offset = number(feature, "offset");
    Plane p = base;
    p.normal = rotate_about(base.normal, base.x_axis, angle);
    p.origin = base.origin + p.normal * offset;
    return p;
  }
  if (feature.kind != OpKind::Sketch) {
    throw InterpretError(feature.id, InterpretReason::UnsupportedOperation, "feature has no plane");
  }
  const ParamValue& plane = param_or_default(feature, "plane");
  if (plane.is<Keyword>()) return principal_plane(plane.as<Keyword>().name);
  const Query& q = plane.as<Query>();
  const Feature* target = program.find_feature(q.op_id);
  if (target == nullptr || target->kind != OpKind::ConstructionPlane) {
    throw InterpretError(feature.id, InterpretReason::UnsupportedOperation,
                         "sketch plane " + q.op_id.text() + " is not a construction plane");
  }
  return resolve_plane(*target, program);
}

Mesh extrude_region(const Region& region, const Plane& plane, double from, double to) {
  if (!(to > from)) throw std::invalid_argument("extrude span must be positive");
  std::vector<Vec2> flat = region.outer;
  for (const auto& h : region.holes) flat.insert(flat.end(), h.begin(), h.end());
  auto n = static_cast<std::uint32_t>(flat.size());

  Mesh mesh;
  mesh.vertices.reserve(2 * n);
  for (const auto& p : flat) mesh.vertices.push_back(plane.to_world(p) + plane.normal * from);
  for (const auto& p : flat) mesh.vertices.push_back(plane.to_world(p) + plane.normal * to);

  for (const auto& t : triangulate(region)) {
    mesh.triangles.push_back({t[0] + n, t[1] + n, t[2] + n});
    mesh.triangles.push_back({t[0], t[2], t[1]});
  }
  std::uint32_t begin = 0;
  auto walls = [&](std::size_t size) {
    auto m = static_cast<std::uint32_t>(size);
    for (std::uint32_t i = 0; i < m; ++i) {
      std::uint32_t b0 = begin + i, b1 = begin + (i + 1) % m;
      mesh.triangles.push_back({b0, b1, b1 + n});
      mesh.triangles.push_back({b0, b1 + n, b0 + n});
    }
    begin += m;
  };
  walls(region.outer.size());
  for (const auto& h : region.holes) walls(h.size());
  return mesh;
}

Mesh extrude_region(const Region& region, const Plane& plane, double depth, bool midplane) {
  if (!(depth > 0)) throw std::invalid_argument("extrude depth must be positive");
  return midplane ? extrude_region(region, plane, -depth / 2, depth / 2) : extrude_region(region, plane, 0, depth);
}

std::vector<Body> interpret(const Program& program, const InterpretConfig& config) {
  std::vector<Body> bodies;
  for (const auto& f : program.features) {
    switch (f.kind) {
      case OpKind::Sketch:
        resolve_plane(f, program);
        break;
      case OpKind::ConstructionPlane:
        break;
      case OpKind::Extrude:
        bodies.push_back({{f.id}, extrude_feature(f, program, config)});
        break;
      case OpKind::Boolean: {
        const std::string& mode = param_or_default(f, "mode").as<Keyword>().name;
        if (mode != "UNION") {
          throw InterpretError(f.id, InterpretReason::UnsupportedOperation, "boolean " + mode);
        }
        std::vector<std::size_t> inputs;
        for (const auto* name : {"targets", "tools"}) {
          for (const auto& q : queries(param_or_default(f, name))) {
            std::size_t i = find_body(bodies, f, q);
            if (std::find(inputs.begin(), inputs.end(), i) == inputs.end()) inputs.push_back(i);
          }
        }
        if (inputs.empty()) throw InterpretError(f.id, InterpretReason::EmptyResult, "union of no bodies");
        for (std::size_t a = 0; a < inputs.size(); ++a) {
          for (std::size_t b = a + 1; b < inputs.size(); ++b) {
            if (!bounding_box(bodies[inputs[a]].mesh).disjoint(bounding_box(bodies[inputs[b]].mesh))) {
              throw InterpretError(f.id, InterpretReason::UnsupportedOperation, "union of overlapping bodies");
            }
          }
        }
        Body merged{{f.id}, {}};
        for (auto i : inputs) {
          merged.ids.insert(merged.ids.end(), bodies[i].ids.begin(), bodies[i].ids.end());
          merged.mesh.append(bodies[i].mesh);
        }
        std::size_t slot = *std::min_element(inputs.begin(), inputs.end());
        std::vector<Body> next;
        for (std::size_t i = 0; i < bodies.size(); ++i) {
          if (i == slot) next.push_back(merged);
          if (std::find(inputs.begin(), inputs.end(), i) == inputs.end()) next.push_back(std::move(bodies[i]));
        }
        bodies = std::move(next);
        break;
      }
      case OpKind::DeleteBody: {
        std::vector<std::size_t> doomed;
        for (const auto& q : queries(param_or_default(f, "entities"))) doomed.push_back(find_body(bodies, f, q));
        std::vector<Body> next;
        for (std::size_t i = 0; i < bodies.size(); ++i) {
          if (std::find(doomed.begin(), doomed.end(), i) == doomed.end()) next.push_back(std::move(bodies[i]));
        }
        bodies = std::move(next);
        break;
      }
      default:
        throw InterpretError(f.id, InterpretReason::UnsupportedOperation,
                             std::string(to_string(f.kind)) + " is not interpreted");
    }
  }
  if (bodies.empty()) {
    Identifier last = program.features.empty() ? Identifier() : program.features.back().id;
    throw InterpretError(last, InterpretReason::EmptyResult, "program produces no bodies");
  }
  return bodies;
}

namespace {

// Python's round(x, 2) followed by repr().
std::string py_round2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  double r = std::strtod(buf, nullptr);
  std::string s = format_double(r);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string triple(Vec3 v) {
  return "(" + py_round2(v.x) + ", " + py_round2(v.y) + ", " + py_round2(v.z) + ")";
}

}  // namespace

std::string bbox_prompt(const BBox& bbox) {
  Vec3 center = bbox.max - bbox.extent() * 0.5;
  double scale = bbox.max_extent() / 2;
  return "Bounds from " + triple(bbox.min) + " to " + triple(bbox.max) + ", center = " + triple(center) +
         ", scale = " + py_round2(scale);
}

}  // namespace cadscript::geom

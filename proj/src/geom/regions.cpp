#include <algorithm>
#include <cmath>
#include <numbers>

#include "cadscript/geom/interpret.hpp"

namespace cadscript::geom {

namespace {

constexpr double kCoincident = 1e-6;

Vec2 point_param(const SketchEntity& e, std::string_view name) {
  const auto& c = e.params.find(name)->second.as<Vec>().components;
  if (!c[0].is_literal() || !c[1].is_literal()) {
    throw InterpretError(e.id, InterpretReason::UnsupportedOperation, "non-literal coordinate");
  }
  return {c[0].value().to_double(), c[1].value().to_double()};
}

double scalar_param(const SketchEntity& e, std::string_view name) {
  const Scalar& s = e.params.find(name)->second.as<Scalar>();
  if (!s.is_literal()) throw InterpretError(e.id, InterpretReason::UnsupportedOperation, "non-literal value");
  return s.value().to_double();
}

// Open polyline from one sketch primitive.
struct Curve {
  Identifier id;
  std::vector<Vec2> points;
};

Loop circle_loop(Vec2 c, double r, int n) {
  Loop loop;
  loop.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double a = 2 * std::numbers::pi * k / n;
    loop.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return loop;
}

Curve arc_curve(const SketchEntity& e, int segments_per_circle) {
  Vec2 s = point_param(e, "start");
  Vec2 m = point_param(e, "mid");
  Vec2 t = point_param(e, "end");
  // Circumcenter of start, mid, end.
  double d = 2 * (s.x * (m.y - t.y) + m.x * (t.y - s.y) + t.x * (s.y - m.y));
  if (std::abs(d) < 1e-15) {
    throw InterpretError(e.id, InterpretReason::SelfIntersectingProfile, "collinear arc points");
  }
  double s2 = dot(s, s), m2 = dot(m, m), t2 = dot(t, t);
  Vec2 c{(s2 * (m.y - t.y) + m2 * (t.y - s.y) + t2 * (s.y - m.y)) / d,
         (s2 * (t.x - m.x) + m2 * (s.x - t.x) + t2 * (m.x - s.x)) / d};
  double r = norm(s - c);
  bool ccw = cross(m - s, t - s) > 0;
  double a0 = std::atan2(s.y - c.y, s.x - c.x);
  double a1 = std::atan2(t.y - c.y, t.x - c.x);
  double sweep = ccw ? a1 - a0 : a0 - a1;
  while (sweep <= 0) sweep += 2 * std::numbers::pi;
  int n = std::max(1, static_cast<int>(std::ceil(segments_per_circle * sweep / (2 * std::numbers::pi) - 1e-9)));
  Curve curve{e.id, {s}};
  for (int k = 1; k < n; ++k) {
    double a = a0 + (ccw ? 1 : -1) * sweep * k / n;
    curve.points.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  curve.points.push_back(t);
  return curve;
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  double scale = std::max({norm(b - a), norm(c - a), 1e-300});
  if (std::abs(v) <= 1e-12 * scale * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

// Closed-segment intersection, touching included.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool loop_is_simple(const Loop& loop) {
  std::size_t n = loop.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = loop[i], b = loop[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      Vec2 c = loop[j], d = loop[(j + 1) % n];
      if (adjacent) {
        // Neighbouring segments may only share their common vertex.
        Vec2 shared = j == i + 1 ? b : a;
        Vec2 other_first = j == i + 1 ? a : b;
        Vec2 other_second = j == i + 1 ? d : c;
        if (orientation(other_first, shared, other_second) == 0 &&
            dot(other_first - shared, other_second - shared) > 0) {
          return false;  // folds back on itself
        }
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

bool loops_cross(const Loop& p, const Loop& q) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    Vec2 a = p[i], b = p[(i + 1) % p.size()];
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (segments_intersect(a, b, q[j], q[(j + 1) % q.size()])) return true;
    }
  }
  return false;
}

bool point_in_loop(Vec2 p, const Loop& loop) {
  bool inside = false;
  for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    Vec2 a = loop[i], b = loop[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

Loop dedupe(Loop loop) {
  Loop out;
  for (const auto& p : loop) {
    if (out.empty() || norm(p - out.back()) > 1e-9) out.push_back(p);
  }
  while (out.size() > 1 && norm(out.front() - out.back()) <= 1e-9) out.pop_back();
  return out;
}

}  // namespace

double signed_area(const Loop& loop) {
  double a = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) a += cross(loop[i], loop[(i + 1) % loop.size()]);
  return a / 2;
}

std::vector<Region> build_regions(const Feature& sketch, int segments_per_circle,
                                  const std::set<Identifier>& only) {
  if (segments_per_circle < 3) throw std::invalid_argument("segments_per_circle must be at least 3");
  std::vector<Loop> loops;
  std::vector<Identifier> loop_owner;
  std::vector<Curve> curves;

  for (const auto& e : sketch.entities()) {
    if (!only.empty() && only.count(e.id) == 0) continue;
    switch (e.kind) {
      case EntityKind::Line:
        curves.push_back({e.id, {point_param(e, "start"), point_param(e, "end")}});
        break;
      case EntityKind::Arc:
        curves.push_back(arc_curve(e, segments_per_circle));
        break;
      case EntityKind::Circle:
        loops.push_back(circle_loop(point_param(e, "center"), scalar_param(e, "radius"), segments_per_circle));
        loop_owner.push_back(e.id);
        break;
      default:
        throw InterpretError(e.id, InterpretReason::UnsupportedOperation,
                             "sketch primitive " + std::string(to_string(e.kind)) + " is not interpreted");
    }
  }

  // Chain open curves into loops through coincident endpoints.
  std::vector<Vec2> nodes;
  auto node_of = [&](Vec2 p) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (norm(nodes[i] - p) <= kCoincident) return i;
    }
    nodes.push_back(p);
    return nodes.size() - 1;
  };
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  for (const auto& c : curves) ends.emplace_back(node_of(c.points.front()), node_of(c.points.back()));
  std::vector<int> degree(nodes.size(), 0);
  for (const auto& [a, b] : ends) {
    ++degree[a];
    ++degree[b];
  }
  for (std::size_t k = 0; k < curves.size(); ++k) {
    for (auto n : {ends[k].first, ends[k].second}) {
      if (degree[n] == 1) {
        throw InterpretError(curves[k].id, InterpretReason::OpenProfile, "profile does not close at this primitive");
      }
      if (degree[n] > 2) {
        throw InterpretError(curves[k].id, InterpretReason::SelfIntersectingProfile,
                             "more than two primitives meet at one point");
      }
    }
  }
  std::vector<bool> used(curves.size(), false);
  for (std::size_t start = 0; start < curves.size(); ++start) {
    if (used[start]) continue;
    Loop loop;
    std::size_t k = start;
    std::size_t at = ends[start].first;
    const std::size_t first_node = at;
    while (true) {
      used[k] = true;
      const auto& pts = curves[k].points;
      bool forward = ends[k].first == at;
      if (forward) {
        loop.insert(loop.end(), pts.begin(), pts.end() - 1);
        at = ends[k].second;
      } else {
        loop.insert(loop.end(), pts.rbegin(), pts.rend() - 1);
        at = ends[k].first;
      }
      if (at == first_node) break;
      std::size_t next = curves.size();
      for (std::size_t j = 0; j < curves.size(); ++j) {
        if (!used[j] && (ends[j].first == at || ends[j].second == at)) {
          next = j;
          break;
        }
      }
      if (next == curves.size()) {
        throw InterpretError(curves[k].id, InterpretReason::OpenProfile, "profile does not close");
      }
      k = next;
    }
    loops.push_back(loop);
    loop_owner.push_back(curves[start].id);
  }

  for (std::size_t i = 0; i < loops.size(); ++i) {
    loops[i] = dedupe(loops[i]);
    if (!loop_is_simple(loops[i]) || std::abs(signed_area(loops[i])) < 1e-12) {
      throw InterpretError(loop_owner[i], InterpretReason::SelfIntersectingProfile, "loop is not simple");
    }
  }
  for (std::size_t i = 0; i < loops.size(); ++i) {
    for (std::size_t j = i + 1; j < loops.size(); ++j) {
      if (loops_cross(loops[i], loops[j])) {
        throw InterpretError(loop_owner[j], InterpretReason::SelfIntersectingProfile, "loops cross or touch");
      }
    }
  }

  // Even-odd nesting: loops inside an even number of others bound material.
  std::vector<int> depth(loops.size(), 0);
  std::vector<std::vector<std::size_t>> containers(loops.size());
  for (std::size_t i = 0; i < loops.size(); ++i) {
    for (std::size_t j = 0; j < loops.size(); ++j) {
      if (i != j && point_in_loop(loops[i].front(), loops[j])) {
        ++depth[i];
        containers[i].push_back(j);
      }
    }
  }
  std::vector<Region> regions;
  std::vector<std::ptrdiff_t> region_of(loops.size(), -1);
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (depth[i] % 2 != 0) continue;
    Loop outer = loops[i];
    if (signed_area(outer) < 0) std::reverse(outer.begin(), outer.end());
    region_of[i] = static_cast<std::ptrdiff_t>(regions.size());
    regions.push_back({std::move(outer), {}});
  }
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (depth[i] % 2 == 0) continue;
    std::size_t parent = containers[i].front();
    for (auto j : containers[i]) {
      if (depth[j] > depth[parent]) parent = j;
    }
    Loop hole = loops[i];
    if (signed_area(hole) > 0) std::reverse(hole.begin(), hole.end());
    regions[static_cast<std::size_t>(region_of[parent])].holes.push_back(std::move(hole));
  }
  return regions;
}

}  // namespace cadscript::geom

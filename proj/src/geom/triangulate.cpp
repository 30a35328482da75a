#include <algorithm>
#include <cmath>
#include <limits>

#include "cadscript/geom/interpret.hpp"

namespace cadscript::geom {

namespace {

struct Polygon {
  std::vector<Vec2> pts;             // outer + holes, concatenated
  std::vector<std::uint32_t> ring;   // indices into pts, bridged
};

bool strictly_inside_or_on(Vec2 p, Vec2 a, Vec2 b, Vec2 c, double eps) {
  return cross(b - a, p - a) >= -eps && cross(c - b, p - b) >= -eps && cross(a - c, p - c) >= -eps;
}

// Joins one hole to the ring with a pair of coincident bridge edges
// (Eberly, "Triangulation by Ear Clipping").
void bridge_hole(Polygon& poly, std::uint32_t hole_begin, std::uint32_t hole_size, double eps) {
  const auto& pts = poly.pts;
  std::uint32_t m = hole_begin;
  for (std::uint32_t k = hole_begin; k < hole_begin + hole_size; ++k) {
    if (pts[k].x > pts[m].x || (pts[k].x == pts[m].x && pts[k].y < pts[m].y)) m = k;
  }
  Vec2 mp = pts[m];

  // Closest ring edge hit by the ray from M towards +x.
  double best_x = std::numeric_limits<double>::infinity();
  std::size_t hit = poly.ring.size();
  for (std::size_t i = 0; i < poly.ring.size(); ++i) {
    Vec2 a = pts[poly.ring[i]], b = pts[poly.ring[(i + 1) % poly.ring.size()]];
    if ((a.y > mp.y) == (b.y > mp.y) && a.y != mp.y && b.y != mp.y) continue;
    if (a.y == b.y) continue;
    if (std::min(a.y, b.y) > mp.y || std::max(a.y, b.y) < mp.y) continue;
    double x = a.x + (mp.y - a.y) * (b.x - a.x) / (b.y - a.y);
    if (x < mp.x - eps) continue;
    if (x < best_x) {
      best_x = x;
      hit = i;
    }
  }
  if (hit == poly.ring.size()) throw InterpretError({}, InterpretReason::EmptyResult, "hole is not inside its outer loop");

  std::size_t ia = hit, ib = (hit + 1) % poly.ring.size();
  Vec2 a = pts[poly.ring[ia]], b = pts[poly.ring[ib]];
  Vec2 ip{best_x, mp.y};
  std::size_t p_pos;
  if (norm(a - ip) <= eps) {
    p_pos = ia;
  } else if (norm(b - ip) <= eps) {
    p_pos = ib;
  } else {
    p_pos = a.x > b.x ? ia : ib;
    // Reflex ring vertices inside triangle (M, I, P) may block the bridge;
    // take the one closest in angle to the ray.
    Vec2 pp = pts[poly.ring[p_pos]];
    Vec2 t0 = mp, t1 = ip, t2 = pp;
    if (cross(t1 - t0, t2 - t0) < 0) std::swap(t1, t2);
    double best_cos = -2, best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.ring.size(); ++i) {
      if (i == p_pos) continue;
      Vec2 v = pts[poly.ring[i]];
      Vec2 prev = pts[poly.ring[(i + poly.ring.size() - 1) % poly.ring.size()]];
      Vec2 next = pts[poly.ring[(i + 1) % poly.ring.size()]];
      if (cross(v - prev, next - v) > eps) continue;  // convex
      if (!strictly_inside_or_on(v, t0, t1, t2, eps)) continue;
      Vec2 d = v - mp;
      double len = norm(d);
      if (len <= eps) continue;
      double c = d.x / len;
      if (c > best_cos + 1e-12 || (std::abs(c - best_cos) <= 1e-12 && len < best_dist)) {
        best_cos = c;
        best_dist = len;
        p_pos = i;
      }
    }
  }

  std::vector<std::uint32_t> ring;
  ring.reserve(poly.ring.size() + hole_size + 2);
  ring.insert(ring.end(), poly.ring.begin(), poly.ring.begin() + static_cast<std::ptrdiff_t>(p_pos) + 1);
  for (std::uint32_t k = 0; k <= hole_size; ++k) ring.push_back(hole_begin + (m - hole_begin + k) % hole_size);
  ring.push_back(poly.ring[p_pos]);
  ring.insert(ring.end(), poly.ring.begin() + static_cast<std::ptrdiff_t>(p_pos) + 1, poly.ring.end());
  poly.ring = std::move(ring);
}

}  // namespace

std::vector<Triangle> triangulate(const Region& region) {
  Polygon poly;
  poly.pts = region.outer;
  for (std::uint32_t i = 0; i < region.outer.size(); ++i) poly.ring.push_back(i);

  double scale = 0;
  for (const auto& p : region.outer) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double eps = 1e-12 * std::max(scale, 1.0);
  const double area_eps = eps * std::max(scale, 1.0);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> holes;
  for (const auto& h : region.holes) {
    holes.emplace_back(static_cast<std::uint32_t>(poly.pts.size()), static_cast<std::uint32_t>(h.size()));
    poly.pts.insert(poly.pts.end(), h.begin(), h.end());
  }
  auto max_x = [&](std::pair<std::uint32_t, std::uint32_t> h) {
    double x = -std::numeric_limits<double>::infinity();
    for (auto k = h.first; k < h.first + h.second; ++k) x = std::max(x, poly.pts[k].x);
    return x;
  };
  std::stable_sort(holes.begin(), holes.end(), [&](auto l, auto r) { return max_x(l) > max_x(r); });
  for (auto [begin, size] : holes) bridge_hole(poly, begin, size, eps);

  // Ear clipping over a circular linked list.
  const auto& pts = poly.pts;
  std::size_t n = poly.ring.size();
  std::vector<std::size_t> prev(n), next(n);
  for (std::size_t i = 0; i < n; ++i) {
    prev[i] = (i + n - 1) % n;
    next[i] = (i + 1) % n;
  }
  auto at = [&](std::size_t i) { return pts[poly.ring[i]]; };
  auto is_ear = [&](std::size_t i) {
    Vec2 a = at(prev[i]), b = at(i), c = at(next[i]);
    if (cross(b - a, c - b) <= area_eps) return false;
    for (std::size_t j = next[next[i]]; j != prev[i]; j = next[j]) {
      Vec2 p = at(j);
      if (p == a || p == b || p == c) continue;
      if (strictly_inside_or_on(p, a, b, c, eps)) return false;
    }
    return true;
  };

  std::vector<Triangle> tris;
  tris.reserve(n);
  std::size_t remaining = n;
  std::size_t cur = 0;
  std::size_t misses = 0;
  while (remaining > 3) {
    if (is_ear(cur)) {
      tris.push_back({poly.ring[prev[cur]], poly.ring[cur], poly.ring[next[cur]]});
      next[prev[cur]] = next[cur];
      prev[next[cur]] = prev[cur];
      cur = next[cur];
      --remaining;
      misses = 0;
    } else {
      cur = next[cur];
      if (++misses > remaining) {
        throw InterpretError({}, InterpretReason::EmptyResult, "profile could not be triangulated");
      }
    }
  }
  Vec2 a = at(prev[cur]), b = at(cur), c = at(next[cur]);
  if (cross(b - a, c - b) <= area_eps) {
    throw InterpretError({}, InterpretReason::EmptyResult, "profile could not be triangulated");
  }
  tris.push_back({poly.ring[prev[cur]], poly.ring[cur], poly.ring[next[cur]]});
  return tris;
}

}  // namespace cadscript::geom

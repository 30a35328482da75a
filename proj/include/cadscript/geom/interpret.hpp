#pragma once

// Sketch + extrude interpreter. Supported subset: Sketch, ConstructionPlane,
// Extrude, Boolean UNION of bounding-box-disjoint bodies, DeleteBody.
// Sketch profiles may use lines, arcs and circles.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cadscript/ast.hpp"
#include "cadscript/geom/mesh.hpp"

namespace cadscript::geom {

enum class InterpretReason { UnsupportedOperation, OpenProfile, SelfIntersectingProfile, EmptyResult };

std::string_view to_string(InterpretReason reason);  // "unsupported-operation", ...

class InterpretError : public std::runtime_error {
 public:
  InterpretError(Identifier feature, InterpretReason reason, std::string detail);

  const Identifier& feature() const { return feature_; }
  InterpretReason reason() const { return reason_; }
  const std::string& detail() const { return detail_; }

 private:
  Identifier feature_;
  InterpretReason reason_;
  std::string detail_;
};

struct Plane {
  Vec3 origin;
  Vec3 normal{0, 0, 1};
  Vec3 x_axis{1, 0, 0};

  Vec3 y_axis() const { return cross(normal, x_axis); }
  Vec3 to_world(Vec2 p) const { return origin + x_axis * p.x + y_axis() * p.y; }
};

// XY: normal +Z, x +X. XZ: normal -Y, x +X. YZ: normal +X, x +Y. In each
// frame y = normal x x_axis.
Plane principal_plane(const std::string& name);

// Plane of a Sketch or ConstructionPlane feature. A ConstructionPlane turns
// its base frame by `angle` about the base x axis, then moves `offset` along
// the turned normal.
Plane resolve_plane(const Feature& feature, const Program& program);

using Loop = std::vector<Vec2>;

struct Region {
  Loop outer;               // counter-clockwise
  std::vector<Loop> holes;  // clockwise
};

struct InterpretConfig {
  int segments_per_circle = 64;
};

// Closed regions bounded by the sketch's line, arc and circle primitives.
// `only` restricts the primitives used (empty set = all).
std::vector<Region> build_regions(const Feature& sketch, int segments_per_circle = 64,
                                  const std::set<Identifier>& only = {});

double signed_area(const Loop& loop);

// Ear clipping of a polygon with holes; holes are bridged to the outer loop
// first. Returns index triples into the concatenation outer + holes[0] +
// holes[1] + ..., counter-clockwise. Throws InterpretError(empty-result) if
// no ear can be found.
std::vector<Triangle> triangulate(const Region& region);

// Prism over the region between signed offsets `from` < `to` along the
// plane normal.
Mesh extrude_region(const Region& region, const Plane& plane, double from, double to);
Mesh extrude_region(const Region& region, const Plane& plane, double depth, bool midplane);

struct Body {
  std::vector<Identifier> ids;  // producing feature, plus merged inputs
  Mesh mesh;
};

std::vector<Body> interpret(const Program& program, const InterpretConfig& config = {});

// "Bounds from (x0, y0, z0) to (x1, y1, z1), center = (cx, cy, cz), scale = s"
std::string bbox_prompt(const BBox& bbox);

}  // namespace cadscript::geom

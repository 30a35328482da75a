#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadscript/geom/mesh.hpp"

namespace cadscript::metrics {

using geom::BBox;
using geom::Mesh;
using geom::Vec3;

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit length, aligned with points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  // Throws std::invalid_argument when sizes differ or a normal is not unit.
  void check() const;
};

// Area-weighted uniform sampling; each point takes its triangle's normal.
// Deterministic given `seed`. Throws std::invalid_argument for n == 0 or a
// mesh with zero surface area.
PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed);

// Maps the reference box center to the origin and its largest extent to 1.
// Both shapes of a pair use the reference's transform.
struct UnitTransform {
  Vec3 center;
  double scale = 1;

  static UnitTransform from(const BBox& reference);  // throws on zero extent
  Vec3 apply(Vec3 p) const { return (p - center) * scale; }
};

PointCloud unit_normalize(const PointCloud& cloud, const BBox& reference);
Mesh unit_normalize(const Mesh& mesh, const BBox& reference);
BBox bounding_box(const PointCloud& cloud);

// Six whitespace-separated columns per line: x y z nx ny nz.
std::string write_xyz(const PointCloud& cloud);
PointCloud read_xyz(const std::string& text);

// Exact nearest-neighbour queries. Among equidistant points the smallest
// index wins, so results agree with a linear scan.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points);

  struct Hit {
    std::size_t index = 0;
    double squared_distance = 0;
  };
  Hit nearest(Vec3 q) const;
  // Indices with squared distance <= r * r, ascending.
  std::vector<std::size_t> within(Vec3 q, double r) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_ for leaves
    std::int32_t left = -1, right = -1;
    int axis = -1;  // -1 for leaves
    double split = 0;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void nearest(std::int32_t node, Vec3 q, Hit& best) const;
  void within(std::int32_t node, Vec3 q, double r2, std::vector<std::size_t>& out) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace cadscript::metrics

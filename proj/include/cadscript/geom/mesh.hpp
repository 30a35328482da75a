#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadscript::geom {

struct Vec2 {
  double x = 0;
  double y = 0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Vec3 {
  double x = 0;
  double y = 0;
  double z = 0;

  double operator[](int i) const { return i == 0 ? x : i == 1 ? y : z; }
  double& operator[](int i) { return i == 0 ? x : i == 1 ? y : z; }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend bool operator==(Vec3, Vec3) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double squared_distance(Vec3 a, Vec3 b) {
  Vec3 d = a - b;
  return dot(d, d);
}
inline Vec3 normalized(Vec3 a) { return a * (1.0 / norm(a)); }

using Triangle = std::array<std::uint32_t, 3>;

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  bool empty() const { return triangles.empty(); }
  // Appends `other`, offsetting its indices.
  void append(const Mesh& other);
  friend bool operator==(const Mesh&, const Mesh&) = default;
};

struct BBox {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  Vec3 center() const;
  double max_extent() const;
  double diagonal() const { return norm(extent()); }
  // True when the boxes are separated along at least one axis.
  bool disjoint(const BBox& other) const;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double triangle_area(const Mesh& mesh, const Triangle& t);
Vec3 triangle_normal(const Mesh& mesh, const Triangle& t);  // unit length

// Exact squared distance from p to the closed triangle abc.
double point_triangle_squared_distance(Vec3 p, Vec3 a, Vec3 b, Vec3 c);
// Minimum over all triangles (linear scan). Throws MeshError on an empty mesh.
double squared_distance_to_mesh(Vec3 p, const Mesh& mesh);

// Signed divergence-theorem volume; positive for outward orientation.
// Throws MeshError("empty mesh") when there are no vertices.
double mesh_volume(const Mesh& mesh);

BBox bounding_box(const Mesh& mesh);
BBox bounding_box(const std::vector<Mesh>& meshes);

// Every undirected edge used by exactly two triangles, once in each
// direction.
bool is_watertight(const Mesh& mesh);

// Watertightness, outward orientation and the 1e-12 mm² minimum triangle
// area. Returns a description of each violated invariant.
std::vector<std::string> check_mesh(const Mesh& mesh);

std::string write_stl(const Mesh& mesh, const std::string& name);
std::string write_obj(const Mesh& mesh);
// Reads `v` and triangular `f` records; other records are ignored. Throws
// MeshError on non-triangular faces or bad indices.
Mesh read_obj(const std::string& text);
// ASCII STL only; coincident vertices are merged.
Mesh read_stl(const std::string& text);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace cadscript::geom

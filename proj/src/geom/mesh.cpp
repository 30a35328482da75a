#include "cadscript/geom/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace cadscript::geom {

void Mesh::append(const Mesh& other) {
  auto offset = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& t : other.triangles) triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
}

Vec3 BBox::center() const { return max - extent() * 0.5; }

double BBox::max_extent() const {
  Vec3 e = extent();
  return std::max({e.x, e.y, e.z});
}

bool BBox::disjoint(const BBox& other) const {
  for (int i = 0; i < 3; ++i) {
    if (max[i] < other.min[i] || other.max[i] < min[i]) return true;
  }
  return false;
}

double triangle_area(const Mesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.vertices[t[0]];
  return 0.5 * norm(cross(mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a));
}

Vec3 triangle_normal(const Mesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.vertices[t[0]];
  return normalized(cross(mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a));
}

double point_triangle_squared_distance(Vec3 p, Vec3 a, Vec3 b, Vec3 c) {
  // Closest-point region walk (Ericson, Real-Time Collision Detection 5.1.5).
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return squared_distance(p, a);
  Vec3 bp = p - b;
  double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return squared_distance(p, b);
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return squared_distance(p, a + ab * (d1 / (d1 - d3)));
  Vec3 cp = p - c;
  double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return squared_distance(p, c);
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return squared_distance(p, a + ac * (d2 / (d2 - d6)));
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return squared_distance(p, b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))));
  }
  double denom = 1 / (va + vb + vc);
  return squared_distance(p, a + ab * (vb * denom) + ac * (vc * denom));
}

double squared_distance_to_mesh(Vec3 p, const Mesh& mesh) {
  if (mesh.triangles.empty()) throw MeshError("empty mesh");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    best = std::min(best, point_triangle_squared_distance(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                          mesh.vertices[t[2]]));
  }
  return best;
}

double mesh_volume(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw MeshError("empty mesh");
  double six_v = 0;
  for (const auto& t : mesh.triangles) {
    six_v += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
  }
  return six_v / 6.0;
}

BBox bounding_box(const Mesh& mesh) { return bounding_box(std::vector<Mesh>{mesh}); }

BBox bounding_box(const std::vector<Mesh>& meshes) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BBox box{{inf, inf, inf}, {-inf, -inf, -inf}};
  bool any = false;
  for (const auto& m : meshes) {
    for (const auto& v : m.vertices) {
      any = true;
      for (int i = 0; i < 3; ++i) {
        box.min[i] = std::min(box.min[i], v[i]);
        box.max[i] = std::max(box.max[i], v[i]);
      }
    }
  }
  if (!any) throw MeshError("empty mesh");
  return box;
}

bool is_watertight(const Mesh& mesh) {
  // Directed edge counts: a closed, consistently oriented surface uses each
  // directed edge once and its reverse once.
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  }
  if (directed.empty()) return false;
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    auto reverse = directed.find({edge.second, edge.first});
    if (reverse == directed.end() || reverse->second != 1) return false;
  }
  return true;
}

std::vector<std::string> check_mesh(const Mesh& mesh) {
  std::vector<std::string> problems;
  if (mesh.triangles.empty()) {
    problems.emplace_back("mesh has no triangles");
    return problems;
  }
  for (const auto& t : mesh.triangles) {
    for (auto i : t) {
      if (i >= mesh.vertices.size()) {
        problems.emplace_back("triangle index out of range");
        return problems;
      }
    }
  }
  if (!is_watertight(mesh)) problems.emplace_back("mesh is not watertight");
  std::size_t degenerate = 0;
  for (const auto& t : mesh.triangles) {
    if (!(triangle_area(mesh, t) > 1e-12)) ++degenerate;
  }
  if (degenerate > 0) problems.push_back(std::to_string(degenerate) + " degenerate triangle(s)");
  if (!(mesh_volume(mesh) > 0)) problems.emplace_back("mesh is not outward oriented");
  return problems;
}

std::string format_double(double value) {
  if (value == 0) value = 0;  // no "-0"
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string write_stl(const Mesh& mesh, const std::string& name) {
  std::ostringstream os;
  os << "solid " << name << "\n";
  for (const auto& t : mesh.triangles) {
    Vec3 n = triangle_normal(mesh, t);
    os << "  facet normal " << format_double(n.x) << ' ' << format_double(n.y) << ' ' << format_double(n.z)
       << "\n    outer loop\n";
    for (auto i : t) {
      const Vec3& v = mesh.vertices[i];
      os << "      vertex " << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z)
         << "\n";
    }
    os << "    endloop\n  endfacet\n";
  }
  os << "endsolid " << name << "\n";
  return os.str();
}

std::string write_obj(const Mesh& mesh) {
  std::ostringstream os;
  for (const auto& v : mesh.vertices) {
    os << "v " << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << "\n";
  }
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
  return os.str();
}

namespace {

double parse_double(const std::string& token, int line) {
  double v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw MeshError("obj line " + std::to_string(line) + ": bad number '" + token + "'");
  }
  return v;
}

}  // namespace

Mesh read_obj(const std::string& text) {
  Mesh mesh;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  struct FaceRecord {
    int line;
    std::vector<long> idx;
    std::size_t vertices_so_far;
  };
  std::vector<FaceRecord> faces;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::string a, b, c;
      if (!(ls >> a >> b >> c)) throw MeshError("obj line " + std::to_string(line_no) + ": short vertex");
      mesh.vertices.push_back({parse_double(a, line_no), parse_double(b, line_no), parse_double(c, line_no)});
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string ref;
      while (ls >> ref) {
        // Only the position index matters: "7", "7/2" or "7/2/5".
        std::string pos = ref.substr(0, ref.find('/'));
        long v = 0;
        auto res = std::from_chars(pos.data(), pos.data() + pos.size(), v);
        if (res.ec != std::errc() || res.ptr != pos.data() + pos.size() || v == 0) {
          throw MeshError("obj line " + std::to_string(line_no) + ": bad face index '" + ref + "'");
        }
        idx.push_back(v);
      }
      if (idx.size() != 3) {
        throw MeshError("obj line " + std::to_string(line_no) + ": only triangular faces are supported");
      }
      faces.push_back({line_no, std::move(idx), mesh.vertices.size()});
    }
  }
  for (const auto& [line_at, idx, so_far] : faces) {
    Triangle t{};
    for (int k = 0; k < 3; ++k) {
      // Negative indices count back from the last vertex read before the face.
      long v = idx[k] > 0 ? idx[k] - 1 : static_cast<long>(so_far) + idx[k];
      if (v < 0 || v >= static_cast<long>(mesh.vertices.size())) {
        throw MeshError("obj line " + std::to_string(line_at) + ": face index out of range");
      }
      t[k] = static_cast<std::uint32_t>(v);
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

// ASCII STL; vertices with identical coordinates are merged.
Mesh read_stl(const std::string& text) {
  Mesh mesh;
  std::map<std::tuple<double, double, double>, std::uint32_t> index;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::uint32_t> pending;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "vertex") {
      std::string a, b, c;
      if (!(ls >> a >> b >> c)) throw MeshError("stl line " + std::to_string(line_no) + ": short vertex");
      Vec3 v{parse_double(a, line_no), parse_double(b, line_no), parse_double(c, line_no)};
      auto [it, fresh] = index.try_emplace({v.x, v.y, v.z}, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (fresh) mesh.vertices.push_back(v);
      pending.push_back(it->second);
    } else if (tag == "endloop") {
      if (pending.size() != 3) throw MeshError("stl line " + std::to_string(line_no) + ": facet is not a triangle");
      mesh.triangles.push_back({pending[0], pending[1], pending[2]});
      pending.clear();
    }
  }
  if (mesh.triangles.empty()) throw MeshError("stl: no facets (binary STL is not supported)");
  return mesh;
}

}  // namespace cadscript::geom

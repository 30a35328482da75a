#include "cadscript/metrics/point_cloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cadscript::metrics {

void PointCloud::check() const {
  if (points.size() != normals.size()) throw std::invalid_argument("points and normals differ in length");
  for (const auto& n : normals) {
    if (std::abs(geom::norm(n) - 1) > 1e-9) throw std::invalid_argument("normal is not unit length");
  }
}

namespace {

// Uniform double in [0, 1) from the top 53 bits.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  std::vector<double> cumulative;
  cumulative.reserve(mesh.triangles.size());
  double total = 0;
  for (const auto& t : mesh.triangles) {
    total += geom::triangle_area(mesh, t);
    cumulative.push_back(total);
  }
  if (!(total > 0)) throw std::invalid_argument("mesh has zero surface area");

  std::mt19937_64 rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = uniform(rng) * total;
    auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    k = std::min(k, mesh.triangles.size() - 1);
    // Skip zero-area triangles that share a cumulative value with a neighbour.
    while (geom::triangle_area(mesh, mesh.triangles[k]) == 0 && k + 1 < mesh.triangles.size()) ++k;
    const auto& t = mesh.triangles[k];
    double s = std::sqrt(uniform(rng));
    double r = uniform(rng);
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    cloud.points.push_back(a * (1 - s) + b * (s * (1 - r)) + c * (s * r));
    cloud.normals.push_back(geom::triangle_normal(mesh, t));
  }
  return cloud;
}

UnitTransform UnitTransform::from(const BBox& reference) {
  double extent = reference.max_extent();
  if (!(extent > 0)) throw std::invalid_argument("reference bounding box has zero extent");
  return {reference.center(), 1 / extent};
}

PointCloud unit_normalize(const PointCloud& cloud, const BBox& reference) {
  UnitTransform t = UnitTransform::from(reference);
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  out.normals = cloud.normals;
  return out;
}

Mesh unit_normalize(const Mesh& mesh, const BBox& reference) {
  UnitTransform t = UnitTransform::from(reference);
  Mesh out = mesh;
  for (auto& v : out.vertices) v = t.apply(v);
  return out;
}

BBox bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("empty point cloud");
  BBox box{cloud.points.front(), cloud.points.front()};
  for (const auto& p : cloud.points) {
    for (int i = 0; i < 3; ++i) {
      box.min[i] = std::min(box.min[i], p[i]);
      box.max[i] = std::max(box.max[i], p[i]);
    }
  }
  return box;
}

std::string write_xyz(const PointCloud& cloud) {
  std::string out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3& n = cloud.normals[i];
    out += geom::format_double(p.x) + ' ' + geom::format_double(p.y) + ' ' + geom::format_double(p.z) + ' ' +
           geom::format_double(n.x) + ' ' + geom::format_double(n.y) + ' ' + geom::format_double(n.z) + '\n';
  }
  return out;
}

PointCloud read_xyz(const std::string& text) {
  PointCloud cloud;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) {
      double d = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), d);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw std::invalid_argument("xyz line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
      v.push_back(d);
    }
    if (v.empty()) continue;
    if (v.size() != 6) throw std::invalid_argument("xyz line " + std::to_string(line_no) + ": expected 6 columns");
    cloud.points.push_back({v[0], v[1], v[2]});
    cloud.normals.push_back({v[3], v[4], v[5]});
  }
  return cloud;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

KdTree::KdTree(const std::vector<Vec3>& points) : points_(points) {
  if (points_.size() > std::numeric_limits<std::uint32_t>::max()) throw std::length_error("too many points");
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, -1, 0});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (auto i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t l, std::uint32_t r) {
                     double a = points_[l][axis], b = points_[r][axis];
                     return a < b || (a == b && l < r);
                   });
  double split = points_[order_[mid]][axis];
  std::int32_t left = build(begin, mid);
  std::int32_t right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].axis = axis;
  nodes_[static_cast<std::size_t>(id)].split = split;
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

KdTree::Hit KdTree::nearest(Vec3 q) const {
  if (points_.empty()) throw std::invalid_argument("nearest neighbour in an empty set");
  Hit best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  nearest(0, q, best);
  return best;
}

void KdTree::nearest(std::int32_t id, Vec3 q, Hit& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      std::size_t k = order_[i];
      double d = geom::squared_distance(q, points_[k]);
      if (d < best.squared_distance || (d == best.squared_distance && k < best.index)) best = {k, d};
    }
    return;
  }
  double diff = q[node.axis] - node.split;
  std::int32_t near = diff < 0 ? node.left : node.right;
  std::int32_t far = diff < 0 ? node.right : node.left;
  nearest(near, q, best);
  // `<=` keeps equidistant candidates reachable for the index tie-break.
  if (diff * diff <= best.squared_distance) nearest(far, q, best);
}

std::vector<std::size_t> KdTree::within(Vec3 q, double r) const {
  std::vector<std::size_t> out;
  if (!points_.empty()) within(0, q, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::within(std::int32_t id, Vec3 q, double r2, std::vector<std::size_t>& out) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      if (geom::squared_distance(q, points_[order_[i]]) <= r2) out.push_back(order_[i]);
    }
    return;
  }
  double diff = q[node.axis] - node.split;
  if (diff <= 0 || diff * diff <= r2) within(node.left, q, r2, out);
  if (diff >= 0 || diff * diff <= r2) within(node.right, q, r2, out);
}

}  // namespace cadscript::metrics

#pragma once

// Linear-scan reference implementations used to check the accelerated
// metric code. Deliberately naive: no trees, no pruning.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "cadscript/metrics/point_cloud.hpp"

namespace oracle {

using cadscript::geom::Vec3;
using cadscript::metrics::PointCloud;

struct Hit {
  std::size_t index;
  double squared_distance;
};

inline double sq(Vec3 a, Vec3 b) {
  Vec3 d = a - b;
  return d.x * d.x + d.y * d.y + d.z * d.z;
}

inline Hit nearest(Vec3 q, const std::vector<Vec3>& pts) {
  Hit best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < pts.size(); ++j) {
    double d = sq(q, pts[j]);
    if (d < best.squared_distance) best = {j, d};  // first minimum = smallest index
  }
  return best;
}

inline std::vector<Hit> nearest_all(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  std::vector<Hit> out;
  for (const auto& p : from) out.push_back(nearest(p, to));
  return out;
}

inline double chamfer(const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
  double a = 0, b = 0;
  for (const auto& h : nearest_all(x, y)) a += h.squared_distance;
  for (const auto& h : nearest_all(y, x)) b += h.squared_distance;
  return a / static_cast<double>(x.size()) + b / static_cast<double>(y.size());
}

inline double normal_consistency(const PointCloud& x, const PointCloud& y) {
  auto dir = [](const PointCloud& f, const PointCloud& t) {
    double s = 0;
    auto hits = nearest_all(f.points, t.points);
    for (std::size_t i = 0; i < hits.size(); ++i) {
      const Vec3& a = f.normals[i];
      const Vec3& b = t.normals[hits[i].index];
      s += a.x * b.x + a.y * b.y + a.z * b.z;
    }
    return s / static_cast<double>(hits.size());
  };
  return 0.5 * (dir(x, y) + dir(y, x));
}

inline std::vector<std::size_t> edge_points(const PointCloud& c, double r, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (i == j || sq(c.points[i], c.points[j]) > r * r) continue;
      const Vec3& a = c.normals[i];
      const Vec3& b = c.normals[j];
      if (std::abs(a.x * b.x + a.y * b.y + a.z * b.z) < threshold) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

// Random cloud in the unit cube with random unit normals. With `lattice`
// set, coordinates snap to a coarse grid so equidistant neighbours (and
// duplicate points) are common.
inline PointCloud random_cloud(std::size_t n, std::mt19937_64& rng, bool lattice) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::normal_distribution<double> g(0, 1);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p{u(rng), u(rng), u(rng)};
    if (lattice) p = {std::round(p.x * 16) / 16, std::round(p.y * 16) / 16, std::round(p.z * 16) / 16};
    Vec3 nrm{g(rng), g(rng), g(rng)};
    double len = std::sqrt(nrm.x * nrm.x + nrm.y * nrm.y + nrm.z * nrm.z);
    c.points.push_back(p);
    c.normals.push_back(nrm * (1 / len));
  }
  return c;
}

// Two square faces meeting at a right angle along the y axis: face A in
// z = 0 (x <= 0, normal +z) and face B in x = 0 (z >= 0, normal +x), both
// on a grid of spacing h that includes the crease row.
inline PointCloud crease_cloud(int rows, int cols, double h) {
  PointCloud c;
  for (int k = 0; k < rows; ++k) {
    for (int j = 0; j < cols; ++j) {
      c.points.push_back({-k * h, j * h, 0});
      c.normals.push_back({0, 0, 1});
    }
  }
  for (int k = 0; k < rows; ++k) {
    for (int j = 0; j < cols; ++j) {
      c.points.push_back({0, j * h, k * h});
      c.normals.push_back({1, 0, 0});
    }
  }
  return c;
}

}  // namespace oracle

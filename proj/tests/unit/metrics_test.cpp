#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cadscript/geom/interpret.hpp"
#include "cadscript/metrics/metrics.hpp"
#include "oracles.hpp"

using namespace cadscript;
using namespace cadscript::metrics;

namespace {

Mesh box_mesh(double x0, double y0, double z0, double sx, double sy, double sz) {
  geom::Region r{{{x0, y0}, {x0 + sx, y0}, {x0 + sx, y0 + sy}, {x0, y0 + sy}}, {}};
  return geom::extrude_region(r, geom::principal_plane("XY"), z0, z0 + sz);
}

PointCloud sphere_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 v{g(rng), g(rng), g(rng)};
    v = v * (1 / geom::norm(v));
    c.points.push_back(v * 0.5);
    c.normals.push_back(v);
  }
  return c;
}

PointCloud single(Vec3 p, Vec3 n = {0, 0, 1}) { return {{p}, {n}}; }

}  // namespace

TEST(Sampling, CubeFacesBinomial) {
  Mesh cube = box_mesh(0, 0, 0, 1, 1, 1);
  PointCloud c = sample_surface(cube, 6000, 7);
  c.check();
  int counts[6] = {};
  for (const auto& n : c.normals) {
    int axis = std::abs(n.x) > 0.5 ? 0 : std::abs(n.y) > 0.5 ? 1 : 2;
    double s = axis == 0 ? n.x : axis == 1 ? n.y : n.z;
    ++counts[axis * 2 + (s > 0 ? 1 : 0)];
  }
  double sigma = std::sqrt(6000.0 * (1.0 / 6) * (5.0 / 6));
  for (int f = 0; f < 6; ++f) EXPECT_LE(std::abs(counts[f] - 1000), 5 * sigma) << "face " << f;
  // Points lie on the surface and on the face their normal names.
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3& p = c.points[i];
    const Vec3& n = c.normals[i];
    for (int a = 0; a < 3; ++a) {
      EXPECT_GE(p[a], -1e-12);
      EXPECT_LE(p[a], 1 + 1e-12);
      if (std::abs(n[a]) > 0.5) EXPECT_NEAR(p[a], n[a] > 0 ? 1 : 0, 1e-12);
    }
  }
}

TEST(Sampling, DeterministicAndSeedSensitive) {
  Mesh cube = box_mesh(0, 0, 0, 1, 2, 3);
  EXPECT_EQ(sample_surface(cube, 500, 3).points, sample_surface(cube, 500, 3).points);
  EXPECT_NE(sample_surface(cube, 500, 3).points, sample_surface(cube, 500, 4).points);
}

TEST(Sampling, SingleTriangle) {
  Mesh tri{{{0, 0, 0}, {2, 0, 0}, {0, 2, 0}}, {{0, 1, 2}}};
  PointCloud c = sample_surface(tri, 200, 1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c.normals[i], (Vec3{0, 0, 1}));
    EXPECT_GE(c.points[i].x, 0);
    EXPECT_GE(c.points[i].y, 0);
    EXPECT_LE(c.points[i].x + c.points[i].y, 2 + 1e-12);
  }
  EXPECT_EQ(sample_surface(tri, 1, 9).size(), 1u);
  Mesh flat{{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}}};
  EXPECT_THROW(sample_surface(flat, 10, 0), std::invalid_argument);
  EXPECT_THROW(sample_surface(tri, 0, 0), std::invalid_argument);
}

TEST(UnitNormalize, SharedReferenceTransform) {
  Mesh ref = box_mesh(0, 0, 0, 2, 2, 2);
  BBox box = geom::bounding_box(ref);
  BBox n = geom::bounding_box(unit_normalize(ref, box));
  EXPECT_EQ(n.min, (Vec3{-0.5, -0.5, -0.5}));
  EXPECT_EQ(n.max, (Vec3{0.5, 0.5, 0.5}));

  Mesh gen = box_mesh(-1, -1, -1, 4, 4, 4);
  BBox g = geom::bounding_box(unit_normalize(gen, box));
  EXPECT_DOUBLE_EQ(g.max.x - g.min.x, 2.0);

  Mesh unit = box_mesh(-0.5, -0.5, -0.5, 1, 1, 1);
  EXPECT_EQ(unit_normalize(unit, geom::bounding_box(unit)), unit);
  EXPECT_THROW(UnitTransform::from({{1, 1, 1}, {1, 1, 1}}), std::invalid_argument);
}

TEST(Chamfer, HandCases) {
  EXPECT_EQ(chamfer(single({0, 0, 0}), single({1, 0, 0})), 2.0);
  PointCloud two{{{0, 0, 0}, {2, 0, 0}}, {{0, 0, 1}, {0, 0, 1}}};
  EXPECT_EQ(chamfer(two, single({1, 0, 0})), 2.0);
  PointCloud c = sphere_cloud(300, 1);
  EXPECT_EQ(chamfer(c, c), 0.0);
}

TEST(Chamfer, MatchesLinearScan) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    PointCloud x = oracle::random_cloud(300 + 97 * trial, rng, trial % 2 == 1);
    PointCloud y = oracle::random_cloud(250 + 131 * trial, rng, trial % 2 == 1);
    auto fast = nearest_neighbors(x.points, y.points);
    auto slow = oracle::nearest_all(x.points, y.points);
    for (std::size_t i = 0; i < fast.size(); ++i) {
      ASSERT_EQ(fast[i].index, slow[i].index) << "trial " << trial << " point " << i;
      ASSERT_EQ(fast[i].squared_distance, slow[i].squared_distance);
    }
    EXPECT_EQ(chamfer(x, y), oracle::chamfer(x.points, y.points));
    EXPECT_EQ(chamfer(x, y), chamfer(y, x));
    EXPECT_EQ(normal_consistency(x, y), oracle::normal_consistency(x, y));
  }
}

TEST(KdTree, BallQueryMatchesScan) {
  std::mt19937_64 rng(5);
  PointCloud c = oracle::random_cloud(2000, rng, true);
  KdTree tree(c.points);
  for (std::size_t i = 0; i < c.size(); i += 37) {
    std::vector<std::size_t> expected;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (oracle::sq(c.points[i], c.points[j]) <= 0.0625 * 0.0625) expected.push_back(j);
    }
    EXPECT_EQ(tree.within(c.points[i], 0.0625), expected);
  }
}

TEST(NormalConsistency, IdentityAndFlip) {
  PointCloud c = sphere_cloud(400, 2);
  EXPECT_EQ(normal_consistency(c, c), 1.0);
  PointCloud flipped = c;
  for (auto& n : flipped.normals) n = -n;
  EXPECT_EQ(normal_consistency(c, flipped), -1.0);
  // X = {a}, Y = {b, c}: both of Y map to a.
  PointCloud x = single({0, 0, 0}, {0, 0, 1});
  PointCloud y{{{1, 0, 0}, {0, 3, 0}}, {{0, 0, 1}, {1, 0, 0}}};
  // X->Y: a's neighbour is b, dot 1. Y->X: dots 1 and 0, mean 0.5.
  EXPECT_EQ(normal_consistency(x, y), 0.75);
}

TEST(EdgePoints, PaperDefaults) {
  EdgeParams p;
  EXPECT_EQ(p.radius, 0.004);
  EXPECT_EQ(p.normal_dot_threshold, 0.2);
}

TEST(EdgePoints, CreaseSelectsPointsWithinRadius) {
  const double h = 0.0015;
  PointCloud c = oracle::crease_cloud(20, 20, h);
  auto edges = classify_edge_points(c);
  EXPECT_EQ(edges, oracle::edge_points(c, 0.004, 0.2));
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < c.size(); ++i) {
    // Distance to the crease line (x = 0, z = 0).
    double d = std::hypot(c.points[i].x, c.points[i].z);
    if (d <= 0.004) near.push_back(i);
  }
  EXPECT_EQ(edges, near);
  EXPECT_FALSE(edges.empty());
}

TEST(EdgePoints, FlatAndSingleClouds) {
  PointCloud flat;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      flat.points.push_back({i * 0.001, j * 0.001, 0});
      flat.normals.push_back({0, 0, 1});
    }
  }
  EXPECT_TRUE(classify_edge_points(flat).empty());
  EXPECT_TRUE(classify_edge_points(single({0, 0, 0})).empty());
}

TEST(EdgeChamfer, CubesAndSphere) {
  Mesh cube = box_mesh(-0.5, -0.5, -0.5, 1, 1, 1);
  PointCloud a = sample_surface(cube, 20000, 1);
  EXPECT_EQ(edge_chamfer(a, a), 0.0);
  EXPECT_FALSE(edge_chamfer(a, sphere_cloud(5000, 3)).has_value());

  Mesh shifted = box_mesh(-0.4, -0.5, -0.5, 1, 1, 1);
  PointCloud b = sample_surface(shifted, 20000, 2);
  auto ea = oracle::edge_points(a, 0.004, 0.2);
  auto eb = oracle::edge_points(b, 0.004, 0.2);
  ASSERT_FALSE(ea.empty());
  ASSERT_FALSE(eb.empty());
  double expected = oracle::chamfer(subset(a, ea).points, subset(b, eb).points);
  EXPECT_EQ(edge_chamfer(a, b), expected);
}

TEST(SetMetrics, CoverageAndMmd) {
  PointCloud A = sphere_cloud(200, 1);
  PointCloud B = A;
  for (auto& p : B.points) p = p + Vec3{0.3, 0, 0};
  EXPECT_EQ(coverage({A, B}, {A, B}), 100.0);
  EXPECT_EQ(coverage({A, B}, {A, A}), 50.0);
  EXPECT_DOUBLE_EQ(coverage({A, B, sphere_cloud(100, 9)}, {B}), 100.0 / 3);
  EXPECT_EQ(mmd({A, B}, {A, B, sphere_cloud(50, 4)}), 0.0);
  EXPECT_EQ(mmd({A, B}, {A}), chamfer(A, B) / 2);
  EXPECT_EQ(mmd({A}, {B}), chamfer(A, B));
  // Adding shapes to G never lowers coverage.
  EXPECT_LE(coverage({A, B}, {A}), coverage({A, B}, {A, B}));
}

TEST(SetMetrics, JensenShannon) {
  PointCloud a = sphere_cloud(1000, 1);
  EXPECT_EQ(jsd({a}, {a}), 0.0);
  PointCloud left, right;
  for (int i = 0; i < 50; ++i) {
    left.points.push_back({-0.4, -0.4 + i * 0.01, 0});
    right.points.push_back({0.4, -0.4 + i * 0.013, 0.2});
  }
  left.normals.assign(50, {0, 0, 1});
  right.normals.assign(50, {0, 0, 1});
  EXPECT_NEAR(jsd({left}, {right}) * kDivergenceScale, 100 * std::numbers::ln2, 1e-9);
  PointCloud b = sphere_cloud(700, 2);
  EXPECT_EQ(jsd({a}, {b}), jsd({b}, {a}));
  EXPECT_LE(jsd({a}, {b}), std::numbers::ln2);
  auto d = voxel_distribution({a, b}, 8);
  double sum = 0;
  for (double p : d.p) sum += p;
  EXPECT_NEAR(sum, 1, 1e-9);
  EXPECT_THROW(voxel_distribution({a}, 0), std::invalid_argument);
}

TEST(SetMetrics, InvalidityRatio) {
  EXPECT_EQ(invalidity_ratio(0, 10), 0.0);
  EXPECT_EQ(invalidity_ratio(2, 10), 20.0);
  EXPECT_EQ(invalidity_ratio(10, 10), 100.0);
  EXPECT_THROW(invalidity_ratio(1, 0), std::invalid_argument);
  EXPECT_THROW(invalidity_ratio(3, 2), std::invalid_argument);
}

namespace {

std::vector<ShapeEntry> toy_set(int n) {
  std::vector<ShapeEntry> set;
  for (int i = 0; i < n; ++i) {
    set.push_back({"shape" + std::to_string(i), box_mesh(0, 0, 0, 1 + i * 0.5, 1 + (i % 3), 0.5 + (i % 2))});
  }
  return set;
}

EvalProtocol small_protocol() {
  EvalProtocol p;
  p.points_accuracy = 3000;
  p.points_distribution = 500;
  p.seed = 42;
  return p;
}

}  // namespace

TEST(EvaluateSets, IdentitySuite) {
  auto refs = toy_set(5);
  MetricsReport r = evaluate_sets(refs, refs, small_protocol());
  EXPECT_EQ(r.cd_median, 0.0);
  EXPECT_EQ(r.nc_median, 1.0);
  EXPECT_EQ(r.cov_pct, 100.0);
  EXPECT_EQ(r.mmd, 0.0);
  EXPECT_EQ(r.jsd, 0.0);
  EXPECT_EQ(r.ir_pct, 0.0);
  EXPECT_EQ(r.subset_reference, 5u);
}

TEST(EvaluateSets, InvalidEntriesExcluded) {
  auto refs = toy_set(5);
  auto gens = refs;
  gens[2].mesh.reset();
  MetricsReport r = evaluate_sets(refs, gens, small_protocol());
  EXPECT_EQ(r.ir_pct, 20.0);
  EXPECT_EQ(r.n_invalid, 1u);
  EXPECT_FALSE(r.pairs[2].valid);
  EXPECT_EQ(r.subset_generated, 4u);
  EXPECT_EQ(r.cd_median, 0.0);

  gens.pop_back();
  EXPECT_THROW(evaluate_sets(refs, gens, small_protocol()), std::invalid_argument);
}

TEST(EvaluateSets, ReportIsReproducible) {
  auto refs = toy_set(6);
  auto gens = toy_set(6);
  for (auto& g : gens) {
    for (auto& v : g.mesh->vertices) v = v * 1.1;
  }
  auto p = small_protocol();
  p.subset_size = 4;
  p.repeats = 3;
  std::string a = evaluate_sets(refs, gens, p).to_json().dump(2);
  p.threads = 3;
  std::string b = evaluate_sets(refs, gens, p).to_json().dump(2);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"subset_reference\": 4"), std::string::npos);
}

TEST(EvaluateSets, ProtocolJson) {
  EvalProtocol p = small_protocol();
  EvalProtocol q = EvalProtocol::from_json(nlohmann::json::parse(p.to_json().dump()));
  EXPECT_EQ(q.points_accuracy, 3000u);
  EXPECT_EQ(q.seed, 42u);
  EXPECT_THROW(EvalProtocol::from_json(nlohmann::json::parse(R"({"bogus": 1})")), std::invalid_argument);
  EXPECT_THROW(EvalProtocol::from_json(nlohmann::json::parse(R"({"repeats": 0})")), std::invalid_argument);
}

TEST(PointCloudIo, XyzRoundTrip) {
  PointCloud c = sphere_cloud(50, 8);
  PointCloud back = read_xyz(write_xyz(c));
  EXPECT_EQ(back.points, c.points);
  EXPECT_EQ(back.normals, c.normals);
  EXPECT_THROW(read_xyz("1 2 3\n"), std::invalid_argument);
}

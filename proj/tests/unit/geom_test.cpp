#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cadscript/geom/interpret.hpp"
#include "cadscript/parser.hpp"

using namespace cadscript;
using namespace cadscript::geom;

namespace {

Program canonical(std::string_view text) { return parse(text, Dialect::Canonical); }

std::string rect_sketch(const std::string& id, const std::string& plane, double x0, double y0, double x1,
                        double y1, int first_entity = 0) {
  const int e = first_entity;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "newSketch(%s%s, entities = {\n"
                "    line(S%d, start = (%.2f, %.2f), end = (%.2f, %.2f));\n"
                "    line(S%d, start = (%.2f, %.2f), end = (%.2f, %.2f));\n"
                "    line(S%d, start = (%.2f, %.2f), end = (%.2f, %.2f));\n"
                "    line(S%d, start = (%.2f, %.2f), end = (%.2f, %.2f));\n"
                "});\n",
                id.c_str(), plane.empty() ? "" : (", plane = " + plane).c_str(), e, x0, y0, x1, y0, e + 1, x1, y0,
                x1, y1, e + 2, x1, y1, x0, y1, e + 3, x0, y1, x0, y0);
  return buf;
}

double closed_form_polygon_prism(int n, double r, double h) {
  return 0.5 * n * r * r * std::sin(2 * std::numbers::pi / n) * h;
}

double shoelace(const std::vector<Vec2>& pts) {
  double a = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return std::abs(a) / 2;
}

double triangulated_area(const Region& r) {
  std::vector<Vec2> flat = r.outer;
  for (const auto& h : r.holes) flat.insert(flat.end(), h.begin(), h.end());
  double a = 0;
  for (const auto& t : triangulate(r)) {
    double c = cross(flat[t[1]] - flat[t[0]], flat[t[2]] - flat[t[0]]);
    EXPECT_GT(c, 0) << "triangle not counter-clockwise";
    a += c / 2;
  }
  return a;
}

InterpretReason failure(const Program& p) {
  try {
    interpret(p);
  } catch (const InterpretError& e) {
    return e.reason();
  }
  ADD_FAILURE() << "program interpreted";
  return InterpretReason::EmptyResult;
}

}  // namespace

TEST(Extrude, UnitCubeVolume) {
  auto p = canonical(rect_sketch("F0", "", 0, 0, 1, 1) +
                     "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 1.00);\n");
  auto bodies = interpret(p);
  ASSERT_EQ(bodies.size(), 1u);
  EXPECT_TRUE(check_mesh(bodies[0].mesh).empty());
  EXPECT_NEAR(mesh_volume(bodies[0].mesh), 1.0, 1e-9);
  BBox box = bounding_box(bodies[0].mesh);
  EXPECT_EQ(box.min, (Vec3{0, 0, 0}));
  EXPECT_EQ(box.max, (Vec3{1, 1, 1}));
}

TEST(Extrude, CirclePrismMatchesClosedForm) {
  auto p = canonical(
      "newSketch(F0, entities = {\n"
      "    circle(S0, center = (3.00, -2.00), radius = 7.50);\n"
      "});\n"
      "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 4.25);\n");
  auto bodies = interpret(p);
  ASSERT_EQ(bodies.size(), 1u);
  EXPECT_TRUE(check_mesh(bodies[0].mesh).empty());
  double expected = closed_form_polygon_prism(64, 7.5, 4.25);
  EXPECT_LE(std::abs(mesh_volume(bodies[0].mesh) - expected) / expected, 1e-9);
}

TEST(Extrude, SpansFollowDirectionFlags) {
  Region sq{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}, {}};
  Plane xy = principal_plane("XY");
  auto span = [](const Mesh& m) {
    BBox b = bounding_box(m);
    return std::pair{b.min.z, b.max.z};
  };
  EXPECT_EQ(span(extrude_region(sq, xy, 4, false)), (std::pair{0.0, 4.0}));
  EXPECT_EQ(span(extrude_region(sq, xy, 4, true)), (std::pair{-2.0, 2.0}));

  auto body = [](const std::string& extra) {
    auto p = canonical(rect_sketch("F0", "", 0, 0, 2, 2) +
                       "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 3.00" + extra + ");\n");
    return interpret(p).at(0).mesh;
  };
  EXPECT_EQ(span(body("")), (std::pair{0.0, 3.0}));
  EXPECT_EQ(span(body(", oppositeDirection = true")), (std::pair{-3.0, 0.0}));
  EXPECT_EQ(span(body(", secondDepth = 1.00")), (std::pair{-1.0, 3.0}));
  EXPECT_EQ(span(body(", oppositeDirection = true, secondDepth = 1.00")), (std::pair{-3.0, 1.0}));
  EXPECT_EQ(span(body(", midplane = true")), (std::pair{-1.5, 1.5}));
}

TEST(Extrude, HoleIsWatertightAndSubtracted) {
  auto p = canonical(
      "newSketch(F0, entities = {\n"
      "    line(S0, start = (0.00, 0.00), end = (10.00, 0.00));\n"
      "    line(S1, start = (10.00, 0.00), end = (10.00, 10.00));\n"
      "    line(S2, start = (10.00, 10.00), end = (0.00, 10.00));\n"
      "    line(S3, start = (0.00, 10.00), end = (0.00, 0.00));\n"
      "    circle(S4, center = (5.00, 5.00), radius = 2.00);\n"
      "});\n"
      "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 2.00);\n");
  auto bodies = interpret(p);
  ASSERT_EQ(bodies.size(), 1u);
  EXPECT_TRUE(check_mesh(bodies[0].mesh).empty());
  double expected = (100 - closed_form_polygon_prism(64, 2, 1)) * 2;
  EXPECT_NEAR(mesh_volume(bodies[0].mesh), expected, 1e-9);
}

TEST(Extrude, IslandInsideHoleIsSeparateRegion) {
  auto p = canonical(
      "newSketch(F0, entities = {\n"
      "    circle(S0, center = (0.00, 0.00), radius = 10.00);\n"
      "    circle(S1, center = (0.00, 0.00), radius = 6.00);\n"
      "    circle(S2, center = (0.00, 0.00), radius = 3.00);\n"
      "});\n");
  auto regions = build_regions(p.features[0]);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].holes.size(), 1u);
  EXPECT_TRUE(regions[1].holes.empty());
  EXPECT_GT(signed_area(regions[0].outer), 0);
  EXPECT_LT(signed_area(regions[0].holes[0]), 0);
}

TEST(Triangulate, AreaMatchesShoelace) {
  // Concave "L" with a collinear vertex and a notch.
  Region l{{{0, 0}, {6, 0}, {6, 2}, {3, 2}, {2, 2}, {2, 5}, {1, 4}, {0, 5}}, {}};
  EXPECT_NEAR(triangulated_area(l), shoelace(l.outer), 1e-12);

  Region holed{{{0, 0}, {10, 0}, {10, 8}, {0, 8}},
               {{{2, 2}, {2, 4}, {4, 4}, {4, 2}}, {{6, 5}, {7, 7}, {8, 5}}}};
  double expected = shoelace(holed.outer) - shoelace(holed.holes[0]) - shoelace(holed.holes[1]);
  EXPECT_NEAR(triangulated_area(holed), expected, 1e-12);
  // n + 2h - 2 triangles for n vertices and h holes.
  EXPECT_EQ(triangulate(holed).size(), 4u + 4 + 3 + 2 * 2 - 2);
}

TEST(Triangulate, HolesAlignedWithOuterVertices) {
  // Hole rightmost vertex level with an outer vertex: the bridge ray passes
  // through that vertex.
  Region r{{{0, 0}, {10, 0}, {10, 5}, {12, 5}, {12, 10}, {0, 10}}, {{{4, 4}, {4, 6}, {6, 5}}}};
  double expected = shoelace(r.outer) - shoelace(r.holes[0]);
  EXPECT_NEAR(triangulated_area(r), expected, 1e-12);
}

TEST(Regions, ArcClosesProfile) {
  // Half disc of radius 5: diameter line plus CCW arc through (0, 5).
  auto p = canonical(
      "newSketch(F0, entities = {\n"
      "    line(S0, start = (-5.00, 0.00), end = (5.00, 0.00));\n"
      "    arc(S1, start = (5.00, 0.00), mid = (0.00, 5.00), end = (-5.00, 0.00));\n"
      "});\n");
  auto regions = build_regions(p.features[0]);
  ASSERT_EQ(regions.size(), 1u);
  // 32 chords over the half circle.
  EXPECT_EQ(regions[0].outer.size(), 33u);
  double expected = 0.5 * 32 * 25 * std::sin(std::numbers::pi / 32);
  EXPECT_NEAR(signed_area(regions[0].outer), expected, 1e-12);
}

TEST(Regions, OpenAndCrossingProfilesRejected) {
  auto open = canonical(
      "newSketch(F0, entities = {\n"
      "    line(S0, start = (0.00, 0.00), end = (10.00, 0.00));\n"
      "    line(S1, start = (10.00, 0.00), end = (10.00, 10.00));\n"
      "    line(S2, start = (10.00, 10.00), end = (0.00, 10.00));\n"
      "});\n"
      "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 1.00);\n");
  EXPECT_EQ(failure(open), InterpretReason::OpenProfile);

  auto bowtie = canonical(
      "newSketch(F0, entities = {\n"
      "    line(S0, start = (0.00, 0.00), end = (10.00, 10.00));\n"
      "    line(S1, start = (10.00, 10.00), end = (10.00, 0.00));\n"
      "    line(S2, start = (10.00, 0.00), end = (0.00, 10.00));\n"
      "    line(S3, start = (0.00, 10.00), end = (0.00, 0.00));\n"
      "});\n"
      "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 1.00);\n");
  EXPECT_EQ(failure(bowtie), InterpretReason::SelfIntersectingProfile);

  auto overlapping = canonical(
      "newSketch(F0, entities = {\n"
      "    circle(S0, center = (0.00, 0.00), radius = 5.00);\n"
      "    circle(S1, center = (6.00, 0.00), radius = 5.00);\n"
      "});\n"
      "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 1.00);\n");
  EXPECT_EQ(failure(overlapping), InterpretReason::SelfIntersectingProfile);
}

TEST(Interpret, UnsupportedOperationsReported) {
  auto p = canonical(rect_sketch("F0", "", 0, 0, 1, 1) +
                     "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 1.00);\n"
                     "opShell(F2, faces = [makeQuery(F1, CAP_END, FACE)], thickness = 0.10);\n");
  try {
    interpret(p);
    FAIL();
  } catch (const InterpretError& e) {
    EXPECT_EQ(e.reason(), InterpretReason::UnsupportedOperation);
    EXPECT_EQ(e.feature().text(), "F2");
  }
}

TEST(Interpret, PlaneFramesAreRightHanded) {
  for (const auto* name : {"XY", "XZ", "YZ"}) {
    Plane p = principal_plane(name);
    EXPECT_NEAR(dot(cross(p.x_axis, p.y_axis()), p.normal), 1.0, 1e-15) << name;
  }
  EXPECT_EQ(principal_plane("XZ").y_axis(), (Vec3{0, 0, 1}));
  EXPECT_EQ(principal_plane("YZ").y_axis(), (Vec3{0, 0, 1}));
}

TEST(Interpret, VolumeInvariantUnderPlaneChoice) {
  double ref = 0;
  for (const auto* plane : {"XY", "XZ", "YZ"}) {
    auto p = canonical(rect_sketch("F0", plane, 1, 2, 4, 7) +
                       "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 2.50);\n");
    auto bodies = interpret(p);
    EXPECT_TRUE(check_mesh(bodies[0].mesh).empty()) << plane;
    double v = mesh_volume(bodies[0].mesh);
    if (ref == 0) ref = v;
    EXPECT_NEAR(v, ref, 1e-9) << plane;
  }
  EXPECT_NEAR(ref, 3 * 5 * 2.5, 1e-9);
}

TEST(Interpret, ConstructionPlaneOffsetAndTilt) {
  auto p = canonical("opPlane(F0, base = XY, offset = 5.00, angle = 90.00);\n" +
                     rect_sketch("F1", "makeQuery(F0, CONSTRUCTION_PLANE, FACE)", 0, 0, 2, 2) +
                     "opExtrude(F2, profile = makeQuery(F1, SKETCH_REGION, FACE), depth = 1.00);\n");
  auto bodies = interpret(p);
  ASSERT_EQ(bodies.size(), 1u);
  // Turning XY by 90 degrees about +X sends the normal to -Y.
  BBox b = bounding_box(bodies[0].mesh);
  EXPECT_NEAR(b.min.y, -6, 1e-12);
  EXPECT_NEAR(b.max.y, -5, 1e-12);
  EXPECT_NEAR(b.min.z, 0, 1e-12);
  EXPECT_NEAR(b.max.z, 2, 1e-12);
  EXPECT_NEAR(mesh_volume(bodies[0].mesh), 4, 1e-9);
}

TEST(Interpret, UnionAndDelete) {
  std::string base = rect_sketch("F0", "", 0, 0, 1, 1) +
                     "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 1.00);\n" +
                     rect_sketch("F2", "", 3, 0, 5, 1, 4) +
                     "opExtrude(F3, profile = makeQuery(F2, SKETCH_REGION, FACE), depth = 1.00);\n";
  auto merged = interpret(canonical(base +
                                    "opBoolean(F4, mode = UNION, targets = [makeQuery(F1, EXTRUDE_BODY, BODY), "
                                    "makeQuery(F3, EXTRUDE_BODY, BODY)]);\n"));
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].ids.front().text(), "F4");
  EXPECT_NEAR(mesh_volume(merged[0].mesh), 3, 1e-9);
  EXPECT_TRUE(check_mesh(merged[0].mesh).empty());

  auto kept = interpret(canonical(base + "opDeleteBodies(F4, entities = [makeQuery(F1, EXTRUDE_BODY, BODY)]);\n"));
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].ids.front().text(), "F3");

  auto all_gone = canonical(base +
                            "opDeleteBodies(F4, entities = [makeQuery(F1, EXTRUDE_BODY, BODY), "
                            "makeQuery(F3, EXTRUDE_BODY, BODY)]);\n");
  EXPECT_EQ(failure(all_gone), InterpretReason::EmptyResult);
}

TEST(Interpret, OverlappingUnionUnsupported) {
  auto p = canonical(rect_sketch("F0", "", 0, 0, 2, 2) +
                     "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 1.00);\n" +
                     rect_sketch("F2", "", 1, 1, 3, 3, 4) +
                     "opExtrude(F3, profile = makeQuery(F2, SKETCH_REGION, FACE), depth = 1.00);\n"
                     "opBoolean(F4, mode = UNION, targets = [makeQuery(F1, EXTRUDE_BODY, BODY), "
                     "makeQuery(F3, EXTRUDE_BODY, BODY)]);\n");
  EXPECT_EQ(failure(p), InterpretReason::UnsupportedOperation);
}

TEST(Interpret, ProfileSubsetByOriginalSet) {
  auto p = canonical(
      "newSketch(F0, entities = {\n"
      "    circle(S0, center = (0.00, 0.00), radius = 1.00);\n"
      "    circle(S1, center = (10.00, 0.00), radius = 2.00);\n"
      "});\n"
      "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE, [originalSet(makeQuery(S1, SKETCH_ENTITY, "
      "EDGE))]), depth = 1.00);\n");
  auto bodies = interpret(p);
  EXPECT_NEAR(mesh_volume(bodies[0].mesh), closed_form_polygon_prism(64, 2, 1), 1e-9);
}

TEST(BBoxPrompt, ReproducesScaleAwareExample) {
  BBox b{{-114.66, -69.35, -31.78}, {68.33, 76.26, 50.8}};
  EXPECT_EQ(bbox_prompt(b),
            "Bounds from (-114.66, -69.35, -31.78) to (68.33, 76.26, 50.8), center = (-23.17, 3.45, 9.51), "
            "scale = 91.5");
}

TEST(BBoxPrompt, UnitCube) {
  EXPECT_EQ(bbox_prompt({{0, 0, 0}, {1, 1, 1}}),
            "Bounds from (0.0, 0.0, 0.0) to (1.0, 1.0, 1.0), center = (0.5, 0.5, 0.5), scale = 0.5");
}

TEST(MeshIo, ObjRoundTrip) {
  Region sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}};
  Mesh m = extrude_region(sq, principal_plane("XY"), 1, false);
  EXPECT_EQ(read_obj(write_obj(m)), m);
  std::string stl = write_stl(m, "cube");
  EXPECT_EQ(stl.rfind("solid cube\n", 0), 0u);
  EXPECT_NE(stl.find("endsolid cube\n"), std::string::npos);
  EXPECT_THROW(read_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n"), MeshError);
  Mesh neg = read_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  EXPECT_EQ(neg.triangles.at(0), (Triangle{0, 1, 2}));
}

TEST(MeshCheck, DetectsOpenAndInvertedMeshes) {
  Region sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}};
  Mesh m = extrude_region(sq, principal_plane("XY"), 1, false);
  Mesh open = m;
  open.triangles.pop_back();
  EXPECT_FALSE(is_watertight(open));
  Mesh inverted = m;
  for (auto& t : inverted.triangles) std::swap(t[1], t[2]);
  EXPECT_TRUE(is_watertight(inverted));
  EXPECT_FALSE(check_mesh(inverted).empty());
  EXPECT_LT(mesh_volume(inverted), 0);
}

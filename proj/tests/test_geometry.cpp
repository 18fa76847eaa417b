#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "anthro/geometry.hpp"
#include "test_util.hpp"

using namespace anthro;
using namespace anthro::test;

TEST_CASE("ray through a unit cube hits front and back") {
  const TriMesh cube = make_cube();
  const auto hits =
      ray_mesh_intersections(cube, Vec3(0, 0, -5), Vec3(0, 0, 1));
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].point.z() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(hits[1].point.z() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(hits[0].t < hits[1].t);

  CHECK(ray_mesh_intersections(cube, Vec3(3, 3, -5), Vec3(0, 0, 1)).empty());
}

TEST_CASE("ray oracle: 1000 random rays against the 3x3-solve reference") {
  std::mt19937_64 rng(42);
  // a deliberately messy scene: three transformed cubes and a cylinder
  std::vector<TriMesh> parts;
  parts.push_back(make_cube(Vec3(0, 0, 0), 1.0));
  parts.push_back(make_cube(Vec3(0.4, 0.2, -0.1), 0.7));
  parts.push_back(make_cylinder(0.3, 24, -1.2, 1.2, 0.2, 0.1));
  TriMesh scene;
  Eigen::Index nv = 0, nf = 0;
  for (auto& p : parts) {
    nv += p.num_vertices();
    nf += p.num_faces();
  }
  scene.V.resize(nv, 3);
  scene.F.resize(nf, 3);
  Eigen::Index vo = 0, fo = 0;
  for (auto& p : parts) {
    scene.V.middleRows(vo, p.num_vertices()) = p.V;
    scene.F.middleRows(fo, p.num_faces()) =
        p.F.array() + static_cast<int>(vo);
    vo += p.num_vertices();
    fo += p.num_faces();
  }

  int nonempty = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 origin(uniform_range(rng, -2, 2), uniform_range(rng, -2, 2),
                      uniform_range(rng, -2, 2));
    // half the rays aimed into the scene, half fully random
    const Vec3 dir =
        trial % 2 == 0
            ? (Vec3(uniform_range(rng, -0.4, 0.4),
                    uniform_range(rng, -0.4, 0.4),
                    uniform_range(rng, -0.4, 0.4)) -
               origin)
                  .normalized()
            : random_unit(rng);
    const auto hits = ray_mesh_intersections(scene, origin, dir);
    auto expect = oracle_ray_hits(scene, origin, dir);
    // apply the documented merge to the oracle list
    std::vector<double> merged;
    for (double t : expect)
      if (merged.empty() || t - merged.back() > 1e-9) merged.push_back(t);
    REQUIRE(hits.size() == merged.size());
    for (size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].t == doctest::Approx(merged[i]).epsilon(1e-9));
      CHECK((hits[i].point - (origin + hits[i].t * dir)).norm() < 1e-9);
    }
    if (!hits.empty()) ++nonempty;
  }
  CHECK(nonempty > 200);  // the scene is actually being hit
}

TEST_CASE("watertight parity: even hit count from outside") {
  std::mt19937_64 rng(43);
  const TriMesh cube = make_cube(Vec3(0.1, -0.05, 0.2), 0.8);
  for (int trial = 0; trial < 500; ++trial) {
    Vec3 origin;
    do {
      origin = Vec3(uniform_range(rng, -3, 3), uniform_range(rng, -3, 3),
                    uniform_range(rng, -3, 3));
    } while (compute_aabb(cube).contains(origin));
    const auto hits = ray_mesh_intersections(cube, origin, random_unit(rng));
    CHECK(hits.size() % 2 == 0);
  }
}

TEST_CASE("plane_from_points") {
  const Plane p = plane_from_points(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  CHECK(std::abs(p.normal.z()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(
      plane_from_points(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)),
      DataError);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 a = 3 * random_unit(rng), b = 3 * random_unit(rng),
               c = 3 * random_unit(rng);
    if (0.5 * ((b - a).cross(c - a)).norm() < 1e-6) continue;
    const Plane q = plane_from_points(a, b, c);
    CHECK(std::abs(q.normal.norm() - 1.0) < 1e-9);
    for (const Vec3& pt : {a, b, c})
      CHECK(std::abs(q.signed_distance(pt)) < 1e-9);
  }
}

TEST_CASE("slice of a unit cube at y=0 is one closed square of length 4") {
  const TriMesh cube = make_cube();
  const auto curves = slice_mesh(cube, Plane{Vec3(0, 0, 0), Vec3(0, 1, 0)});
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].closed);
  CHECK(polyline_length(curves[0]) == doctest::Approx(4.0).epsilon(1e-9));

  // plane above the mesh: nothing
  CHECK(slice_mesh(cube, Plane{Vec3(0, 2, 0), Vec3(0, 1, 0)}).empty());
}

TEST_CASE("slice of a 256-facet cylinder matches the inscribed polygon") {
  const double r = 0.37;
  const int n = 256;
  const TriMesh cyl = make_cylinder(r, n, -0.5, 0.5);
  const auto curves = slice_mesh(cyl, Plane{Vec3(0, 0.1, 0), Vec3(0, 1, 0)});
  REQUIRE(curves.size() == 1);
  REQUIRE(curves[0].closed);
  const double expect = 2.0 * n * r * std::sin(M_PI / n);
  CHECK(polyline_length(curves[0]) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("slice oracle: segments match raw per-triangle extraction") {
  std::mt19937_64 rng(77);
  int instances = 0;
  while (instances < 1000) {
    TriMesh mesh = (instances % 2 == 0)
                       ? make_cube(Vec3(0, 0, 0), 1.0)
                       : make_cylinder(0.4, 16, -0.6, 0.6);
    // random rigid transform
    const Vec3 axis = random_unit(rng);
    const double angle = uniform_range(rng, 0, 2 * M_PI);
    const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    const Vec3 t(uniform_range(rng, -1, 1), uniform_range(rng, -1, 1),
                 uniform_range(rng, -1, 1));
    mesh = transformed(mesh, R, t);
    const Plane plane{t + 0.3 * random_unit(rng), random_unit(rng)};

    const auto polylines = slice_mesh(mesh, plane);
    auto expect = oracle_slice_segments(mesh, plane);

    // flatten the chained polylines back to segments
    std::vector<OracleSegment> got;
    for (const auto& pl : polylines)
      for (Eigen::Index s = 0; s < pl.num_segments(); ++s)
        got.push_back({pl.segment_start(s), pl.segment_end(s)});

    REQUIRE(got.size() == expect.size());
    // greedy unordered matching within 1e-7
    std::vector<bool> used(expect.size(), false);
    for (const auto& g : got) {
      bool matched = false;
      for (size_t i = 0; i < expect.size() && !matched; ++i) {
        if (used[i]) continue;
        const auto& e = expect[i];
        const bool same =
            ((g.a - e.a).norm() < 1e-7 && (g.b - e.b).norm() < 1e-7) ||
            ((g.a - e.b).norm() < 1e-7 && (g.b - e.a).norm() < 1e-7);
        if (same) {
          used[i] = true;
          matched = true;
        }
      }
      REQUIRE(matched);
    }
    // every chained point lies in the plane
    for (const auto& pl : polylines)
      for (const auto& p : pl.points)
        CHECK(std::abs(plane.signed_distance(p)) < 1e-7);
    ++instances;
  }
}

TEST_CASE("slices commute with rigid transforms") {
  std::mt19937_64 rng(99);
  const TriMesh cyl = make_cylinder(0.4, 32, -0.5, 0.5);
  const Plane plane{Vec3(0, 0.2, 0), Vec3(0, 1, 0)};
  const auto base = slice_mesh(cyl, plane);
  REQUIRE(base.size() == 1);

  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Matrix3d R =
        Eigen::AngleAxisd(uniform_range(rng, 0, 2 * M_PI), random_unit(rng))
            .toRotationMatrix();
    const Vec3 t = 2.0 * random_unit(rng);
    const TriMesh moved = transformed(cyl, R, t);
    const Plane moved_plane{R * plane.origin + t, R * plane.normal};
    const auto curves = slice_mesh(moved, moved_plane);
    REQUIRE(curves.size() == 1);
    REQUIRE(curves[0].closed);
    // same point set under the transform
    const auto& pts = curves[0].points;
    REQUIRE(pts.size() == base[0].points.size());
    for (const auto& p : pts) {
      const Vec3 back = R.transpose() * (p - t);
      double best = 1e9;
      for (const auto& q : base[0].points) best = std::min(best, (back - q).norm());
      CHECK(best < 1e-7);
    }
  }
}

TEST_CASE("watertight slices: per-triangle crossings are 0 or 2, all closed") {
  std::mt19937_64 rng(123);
  const TriMesh cyl = make_cylinder(0.4, 20, 0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Plane plane{Vec3(uniform_range(rng, -0.2, 0.2),
                           uniform_range(rng, 0.05, 0.95),
                           uniform_range(rng, -0.2, 0.2)),
                      random_unit(rng)};
    for (const auto& pl : slice_mesh(cyl, plane)) CHECK(pl.closed);
    // crossing parity per triangle
    std::vector<double> d(cyl.num_vertices());
    for (Eigen::Index i = 0; i < cyl.num_vertices(); ++i) {
      d[i] = plane.signed_distance(cyl.vertex(i));
      if (std::abs(d[i]) < 1e-9) d[i] += 2e-9;
    }
    for (Eigen::Index f = 0; f < cyl.num_faces(); ++f) {
      int crossings = 0;
      for (int e = 0; e < 3; ++e)
        if ((d[cyl.F(f, e)] > 0) != (d[cyl.F(f, (e + 1) % 3)] > 0)) ++crossings;
      CHECK((crossings == 0 || crossings == 2));
    }
  }
}

TEST_CASE("locate_on_curve: vertices, midpoints, tolerance boundary") {
  Polyline square;
  square.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  square.closed = true;

  const auto at_vertex = locate_on_curve(square, Vec3(1, 0, 0), 0.001);
  REQUIRE(at_vertex.has_value());
  CHECK((point_at(square, *at_vertex) - Vec3(1, 0, 0)).norm() < 1e-12);

  const auto mid = locate_on_curve(square, Vec3(0.5, 0, 0), 0.001);
  REQUIRE(mid.has_value());
  CHECK(mid->segment == 0);
  CHECK(mid->t == doctest::Approx(0.5).epsilon(1e-9));

  // 0.002 away with tol 0.001: not found
  CHECK_FALSE(locate_on_curve(square, Vec3(0.5, -0.002, 0), 0.001).has_value());
  CHECK(locate_on_curve(square, Vec3(0.5, -0.0009, 0), 0.001).has_value());

  // closing segment is searchable
  const auto closing = locate_on_curve(square, Vec3(0, 0.5, 0), 0.001);
  REQUIRE(closing.has_value());
  CHECK(closing->segment == 3);
}

TEST_CASE("split_closed_curve: squares and random length additivity") {
  Polyline square;
  square.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  square.closed = true;

  // opposite corners -> 2.0 / 2.0
  auto [s1, s2] = split_closed_curve(square, CurvePos{0, 0.0}, CurvePos{2, 0.0});
  CHECK(polyline_length(s1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(polyline_length(s2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((s1.points.front() - Vec3(0, 0, 0)).norm() < 1e-12);
  CHECK((s1.points.back() - Vec3(1, 1, 0)).norm() < 1e-12);
  CHECK((s2.points.front() - Vec3(0, 0, 0)).norm() < 1e-12);
  CHECK((s2.points.back() - Vec3(1, 1, 0)).norm() < 1e-12);

  // adjacent corners -> 1.0 / 3.0
  auto [t1, t2] = split_closed_curve(square, CurvePos{0, 0.0}, CurvePos{1, 0.0});
  const double a = polyline_length(t1), b = polyline_length(t2);
  CHECK(std::min(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::max(a, b) == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(split_closed_curve(square, CurvePos{1, 0.25},
                                     CurvePos{1, 0.25}),
                  DataError);

  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    Polyline poly;
    const int npts = 3 + static_cast<int>(uniform_index(rng, 12));
    for (int i = 0; i < npts; ++i)
      poly.points.push_back(3.0 * random_unit(rng));
    poly.closed = true;
    const double total = polyline_length(poly);
    const auto pos_a = CurvePos{static_cast<Eigen::Index>(
                                    uniform_index(rng, npts)),
                                uniform_range(rng, 0.0, 1.0)};
    const auto pos_b = CurvePos{static_cast<Eigen::Index>(
                                    uniform_index(rng, npts)),
                                uniform_range(rng, 0.0, 1.0)};
    if ((point_at(poly, pos_a) - point_at(poly, pos_b)).norm() < 1e-9) continue;
    const auto [u, v] = split_closed_curve(poly, pos_a, pos_b);
    CHECK(polyline_length(u) + polyline_length(v) ==
          doctest::Approx(total).epsilon(1e-9));
    CHECK((u.points.front() - v.points.front()).norm() < 1e-12);
    CHECK((u.points.back() - v.points.back()).norm() < 1e-12);
  }
}

TEST_CASE("polyline_length: triangle legs open and closed") {
  Polyline tri;
  tri.points = {Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(3, 4, 0)};
  tri.closed = false;
  CHECK(polyline_length(tri) == doctest::Approx(7.0).epsilon(1e-12));
  tri.closed = true;
  CHECK(polyline_length(tri) == doctest::Approx(12.0).epsilon(1e-12));

  std::mt19937_64 rng(31);
  Polyline big;
  for (int i = 0; i < 1000; ++i) big.points.push_back(5.0 * random_unit(rng));
  big.closed = false;
  double expect = 0;
  for (size_t i = 0; i + 1 < big.points.size(); ++i)
    expect += (big.points[i + 1] - big.points[i]).norm();
  CHECK(polyline_length(big) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("convex hull perimeter: square, concave L, 256-gon, rotations") {
  const Plane xy{Vec3::Zero(), Vec3(0, 0, 1)};
  Polyline square;
  square.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  square.closed = true;
  CHECK(convex_hull_perimeter(square, xy) == doctest::Approx(4.0).epsilon(1e-12));

  // concave contour spanning the unit square (notch cut into the top edge):
  // the hull removes the notch and is exactly the square
  Polyline ell;
  ell.points = {Vec3(0, 0, 0),   Vec3(1, 0, 0),     Vec3(1, 1, 0),
                Vec3(0.6, 1, 0), Vec3(0.5, 0.5, 0), Vec3(0.4, 1, 0),
                Vec3(0, 1, 0)};
  ell.closed = true;
  CHECK(convex_hull_perimeter(ell, xy) == doctest::Approx(4.0).epsilon(1e-12));

  // a true L-hexagon keeps only three square corners: its hull is the
  // pentagon with the diagonal across the notch
  Polyline hexl;
  hexl.points = {Vec3(0, 0, 0),     Vec3(1, 0, 0),   Vec3(1, 0.4, 0),
                 Vec3(0.4, 0.4, 0), Vec3(0.4, 1, 0), Vec3(0, 1, 0)};
  hexl.closed = true;
  CHECK(convex_hull_perimeter(hexl, xy) ==
        doctest::Approx(2.8 + std::hypot(0.6, 0.6)).epsilon(1e-12));

  const double r = 0.8;
  Polyline gon;
  for (int k = 0; k < 256; ++k) {
    const double a = 2 * M_PI * k / 256;
    gon.points.emplace_back(r * std::cos(a), r * std::sin(a), 0);
  }
  gon.closed = true;
  CHECK(convex_hull_perimeter(gon, xy) ==
        doctest::Approx(2 * 256 * r * std::sin(M_PI / 256)).epsilon(1e-12));

  Polyline two;
  two.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(convex_hull_perimeter(two, xy), DataError);
  Polyline colinear;
  colinear.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  CHECK_THROWS_AS(convex_hull_perimeter(colinear, xy), DataError);

  // rotation invariance in-plane
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const double ang = uniform_range(rng, 0, 2 * M_PI);
    Polyline rot;
    for (const auto& p : ell.points)
      rot.points.emplace_back(p.x() * std::cos(ang) - p.y() * std::sin(ang),
                              p.x() * std::sin(ang) + p.y() * std::cos(ang),
                              0.0);
    rot.closed = true;
    CHECK(convex_hull_perimeter(rot, xy) == doctest::Approx(4.0).epsilon(1e-9));
  }
}

TEST_CASE("convex hull oracle: random in-plane point sets") {
  std::mt19937_64 rng(314);
  int done = 0;
  while (done < 1000) {
    const Plane plane{3.0 * random_unit(rng), random_unit(rng)};
    // basis for building the points in-plane
    int kmin = 0;
    plane.normal.cwiseAbs().minCoeff(&kmin);
    const Vec3 u = plane.normal.cross(Vec3::Unit(kmin)).normalized();
    const Vec3 v = plane.normal.cross(u);
    const int npts = 4 + static_cast<int>(uniform_index(rng, 40));
    Polyline poly;
    std::vector<Eigen::Vector2d> flat;
    for (int i = 0; i < npts; ++i) {
      const double x = uniform_range(rng, -1, 1), y = uniform_range(rng, -1, 1);
      poly.points.push_back(plane.origin + x * u + y * v);
      flat.emplace_back(x, y);
    }
    poly.closed = true;
    const double expect = oracle_hull_perimeter(flat);
    CHECK(convex_hull_perimeter(poly, plane) ==
          doctest::Approx(expect).epsilon(1e-9));
    ++done;
  }
}

TEST_CASE("curve_encloses_point distinguishes inside from outside loops") {
  const Plane horizontal{Vec3(0, 0.3, 0), Vec3(0, 1, 0)};
  const TriMesh cyl = make_cylinder(0.5, 32, 0.0, 1.0, 2.0, 0.0);
  const auto curves = slice_mesh(cyl, horizontal);
  REQUIRE(curves.size() == 1);
  CHECK(curve_encloses_point(curves[0], horizontal, Vec3(2.0, 0.3, 0)));
  CHECK_FALSE(curve_encloses_point(curves[0], horizontal, Vec3(0.0, 0.3, 0)));
}

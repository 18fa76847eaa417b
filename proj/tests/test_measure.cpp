#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "anthro/measure.hpp"
#include "anthro/synthetic.hpp"
#include "test_util.hpp"

using namespace anthro;
using namespace anthro::test;

namespace {

// Box torso with a full joint set; side rays hit the lateral faces, the
// shoulder ray hits the top, the pelvis ray exits through the bottom.
struct BoxBody {
  TriMesh mesh = make_cube(Vec3(0, 1.0, 0), 1.0);  // spans y in [0.5, 1.5]
  JointSet joints;
  BoxBody() {
    joints.set("right_shoulder", Vec3(-0.3, 1.45, 0));  // 5 cm below the top
    joints.set("left_shoulder", Vec3(0.3, 1.45, 0));
    joints.set("right_elbow", Vec3(-0.3, 1.0, 0));
    joints.set("left_elbow", Vec3(0.3, 1.0, 0));
    joints.set("right_wrist", Vec3(-0.3, 0.8, 0.1));
    joints.set("left_wrist", Vec3(0.3, 0.8, 0.1));
    joints.set("pelvis", Vec3(0, 0.9, 0));
  }
};

JointSet translated(const JointSet& joints, const Vec3& t) {
  JointSet out;
  for (const auto& [name, p] : joints.all()) out.set(name, p + t);
  return out;
}

JointSet scaled(const JointSet& joints, double s) {
  JointSet out;
  for (const auto& [name, p] : joints.all()) out.set(name, s * p);
  return out;
}

}  // namespace

TEST_CASE("landmarks on a box torso land exactly where the rays say") {
  BoxBody box;
  const LandmarkSet lm = compute_landmarks(box.mesh, box.joints);

  // shoulder joint 5 cm below the top face -> landmark exactly 5 cm above
  CHECK((lm.u_rs.point - Vec3(-0.3, 1.5, 0)).norm() < 1e-12);
  CHECK(lm.u_rs.point.y() - box.joints.at("right_shoulder").y() ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK((lm.u_ls.point - Vec3(0.3, 1.5, 0)).norm() < 1e-12);

  // outward side rays
  CHECK((lm.u_re.point - Vec3(-0.5, 1.0, 0)).norm() < 1e-12);
  CHECK((lm.u_le.point - Vec3(0.5, 1.0, 0)).norm() < 1e-12);
  CHECK((lm.u_rw.point - Vec3(-0.5, 0.8, 0.1)).norm() < 1e-12);

  // downward pelvis ray: unique exit through the bottom face
  CHECK((lm.u_ch.point - Vec3(0, 0.5, 0)).norm() < 1e-12);
  CHECK(lm.u_ch.point.y() < box.joints.at("pelvis").y());
}

TEST_CASE("crotch landmark is the LAST downward hit across stacked volumes") {
  // pelvis sits in the upper box; the ray exits it, then crosses the lower
  // box; the landmark is the lowest crossing
  TriMesh upper = make_cube(Vec3(0, 2.0, 0), 0.8);
  TriMesh lower = make_cube(Vec3(0, 0.5, 0), 1.0);
  TriMesh both;
  both.V.resize(upper.num_vertices() + lower.num_vertices(), 3);
  both.V << upper.V, lower.V;
  both.F.resize(upper.num_faces() + lower.num_faces(), 3);
  both.F << upper.F, (lower.F.array() + int(upper.num_vertices()));

  JointSet joints;
  joints.set("right_shoulder", Vec3(-0.3, 2.3, 0));
  joints.set("left_shoulder", Vec3(0.3, 2.3, 0));
  joints.set("right_elbow", Vec3(-0.3, 2.0, 0));
  joints.set("left_elbow", Vec3(0.3, 2.0, 0));
  joints.set("right_wrist", Vec3(-0.3, 1.8, 0.1));
  joints.set("left_wrist", Vec3(0.3, 1.8, 0.1));
  joints.set("pelvis", Vec3(0, 2.0, 0));
  const LandmarkSet lm = compute_landmarks(both, joints);
  CHECK(lm.u_ch.point.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inseam(both, joints) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a wrist ray that exits into empty space is a no-hit error") {
  TriMesh main_box = make_cube(Vec3(0, 1.0, 0), 1.0);
  TriMesh outlier = make_cube(Vec3(2.0, 2.0, 0), 0.4);
  TriMesh scene;
  scene.V.resize(main_box.num_vertices() + outlier.num_vertices(), 3);
  scene.V << main_box.V, outlier.V;
  scene.F.resize(main_box.num_faces() + outlier.num_faces(), 3);
  scene.F << main_box.F, (outlier.F.array() + int(main_box.num_vertices()));

  BoxBody base;
  JointSet joints = base.joints;
  joints.set("right_wrist", Vec3(1.5, 2.5 - 0.35, 0));  // inside bounds, free space
  CHECK_THROWS_WITH_AS(compute_landmarks(scene, joints),
                       doctest::Contains("right_wrist"), DataError);
}

TEST_CASE("height: cube, scaling") {
  const TriMesh cube = make_cube();
  CHECK(height(cube) == doctest::Approx(1.0).epsilon(1e-12));
  TriMesh doubled = cube;
  doubled.V *= 2.0;
  CHECK(height(doubled) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("inseam: constructed crotch height, translation invariance") {
  BodyParams p;
  p.crotch_height = 0.80;
  const SynthBody body = generate_body(p);
  CHECK(inseam(body.mesh, body.joints) == doctest::Approx(0.80).epsilon(1e-12));

  TriMesh moved = body.mesh;
  moved.V.col(1).array() += 1.0;
  CHECK(inseam(moved, translated(body.joints, Vec3(0, 1, 0))) ==
        doctest::Approx(0.80).epsilon(1e-12));
}

TEST_CASE("circumference: 256-facet cylinder matches the inscribed polygon") {
  const double r = 0.15;
  const int n = 256;
  const TriMesh cyl = make_cylinder(r, n, 0.0, 1.0);
  JointSet joints;
  joints.set("pelvis", Vec3(0, 0.5, 0));
  MeasurementConfig cfg;
  const double expect = 2.0 * n * r * std::sin(M_PI / n);
  CHECK(circumference(cyl, joints, cfg, CircumferenceLevel::kPelvis) ==
        doctest::Approx(expect).epsilon(1e-9));
  CHECK(expect == doctest::Approx(0.94246).epsilon(1e-4));
}

TEST_CASE("circumference: elliptical torso matches the 2D hull oracle") {
  TriMesh ell = make_cylinder(1.0, 48, 0.0, 1.0);
  ell.V.col(0) *= 0.17;  // semi-axes a = 0.17, b = 0.11
  ell.V.col(2) *= 0.11;
  JointSet joints;
  joints.set("chest", Vec3(0, 0.4, 0));
  MeasurementConfig cfg;
  const double got = circumference(ell, joints, cfg, CircumferenceLevel::kChest);

  const Plane plane{Vec3(0, 0.4, 0), Vec3(0, 1, 0)};
  const auto curves = slice_mesh(ell, plane);
  REQUIRE(curves.size() == 1);
  std::vector<Eigen::Vector2d> flat;
  for (const auto& p : curves[0].points) flat.emplace_back(p.x(), p.z());
  CHECK(got == doctest::Approx(oracle_hull_perimeter(flat)).epsilon(1e-9));

  // hull perimeter dominates twice the maximal in-plane extent
  double max_extent = 0;
  for (size_t i = 0; i < flat.size(); ++i)
    for (size_t j = i + 1; j < flat.size(); ++j)
      max_extent = std::max(max_extent, (flat[i] - flat[j]).norm());
  CHECK(got >= 2.0 * max_extent - 1e-12);
}

TEST_CASE("circumference: slice above the mesh is an error") {
  const TriMesh cyl = make_cylinder(0.2, 32, 0.0, 1.0);
  JointSet joints;
  joints.set("pelvis", Vec3(0, 2.0, 0));  // above the cylinder
  MeasurementConfig cfg;
  CHECK_THROWS_AS(circumference(cyl, joints, cfg, CircumferenceLevel::kPelvis),
                  DataError);
}

TEST_CASE("waist fallback slices at the pelvis/chest midpoint") {
  const TriMesh cyl = make_cylinder(0.2, 64, 0.0, 1.0);
  JointSet joints;
  joints.set("pelvis", Vec3(0, 0.2, 0));
  joints.set("chest", Vec3(0, 0.8, 0));
  MeasurementConfig cfg;
  const double expect = 2.0 * 64 * 0.2 * std::sin(M_PI / 64);
  CHECK(circumference(cyl, joints, cfg, CircumferenceLevel::kWaist) ==
        doctest::Approx(expect).epsilon(1e-9));

  MeasurementConfig strict;
  strict.waist_fallback = false;
  CHECK_THROWS_WITH_AS(
      circumference(cyl, joints, strict, CircumferenceLevel::kWaist),
      doctest::Contains("waist"), DataError);
}

TEST_CASE("arm measurements are stable across facet counts") {
  BodyParams p16, p32;
  p32.facets = 32;
  const double a16 =
      arm_length(generate_body(p16).mesh, generate_body(p16).joints,
                 MeasurementConfig{}, Side::kRight);
  const double a32 =
      arm_length(generate_body(p32).mesh, generate_body(p32).joints,
                 MeasurementConfig{}, Side::kRight);
  CHECK(std::abs(a16 - a32) / a16 < 0.01);
}

TEST_CASE("measure_all: determinism, mirroring, rigid invariances") {
  BodyParams p;
  p.arm_length_delta = 0.015;  // asymmetric so mirroring is meaningful
  const SynthBody body = generate_body(p);
  const MeasurementConfig cfg;

  const HbdVector a = measure_all(body.mesh, body.joints, cfg);
  const HbdVector b = measure_all(body.mesh, body.joints, cfg);
  CHECK(a == b);  // bit-identical

  // mirrored body: arm lengths swap, everything else unchanged
  const HbdVector m =
      measure_all(mirror_x(body.mesh), mirror_x(body.joints), cfg);
  CHECK(std::abs(m[int(Dim::kRightArmLength)] - a[int(Dim::kLeftArmLength)]) <
        1e-6);
  CHECK(std::abs(m[int(Dim::kLeftArmLength)] - a[int(Dim::kRightArmLength)]) <
        1e-6);
  for (int d : {int(Dim::kShoulderWidth), int(Dim::kInseam),
                int(Dim::kChestCircumference), int(Dim::kWaistCircumference),
                int(Dim::kPelvisCircumference), int(Dim::kHeight)})
    CHECK(std::abs(m[d] - a[d]) < 1e-6);

  // translation invariance
  const Vec3 t(0.37, -0.21, 1.44);
  TriMesh moved = body.mesh;
  moved.V.rowwise() += t.transpose();
  const HbdVector tr = measure_all(moved, translated(body.joints, t), cfg);
  for (int d = 0; d < kNumDims; ++d) CHECK(std::abs(tr[d] - a[d]) < 1e-9);

  // uniform scale equivariance
  const double s = 1.37;
  TriMesh grown = body.mesh;
  grown.V *= s;
  const HbdVector sc = measure_all(grown, scaled(body.joints, s), cfg);
  for (int d = 0; d < kNumDims; ++d)
    CHECK(std::abs(sc[d] - s * a[d]) / (s * a[d]) < 1e-9);
}

TEST_CASE("measure_all annotates component failures with the dimension") {
  const SynthBody body = generate_body(BodyParams{});
  JointSet no_chest;
  for (const auto& [name, p] : body.joints.all())
    if (name != "chest" && name != "waist") no_chest.set(name, p);
  CHECK_THROWS_WITH_AS(measure_all(body.mesh, no_chest),
                       doctest::Contains("chest_circumference"), DataError);
}

TEST_CASE("measurement config validation") {
  MeasurementConfig bad_tol;
  bad_tol.tol = 0.5;
  CHECK_THROWS_AS(bad_tol.validate(), DataError);
  MeasurementConfig bad_frac;
  bad_frac.shoulder_plane_height_fraction = 1.5;
  CHECK_THROWS_AS(bad_frac.validate(), DataError);
}

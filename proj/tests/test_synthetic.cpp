#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "anthro/measure.hpp"
#include "anthro/mesh_io.hpp"
#include "anthro/synthetic.hpp"
#include "test_util.hpp"

using namespace anthro;
using namespace anthro::test;

namespace {

void check_within_truth(const SynthBody& body, const std::string& what) {
  const HbdVector measured = measure_all(body.mesh, body.joints);
  for (int d = 0; d < kNumDims; ++d) {
    INFO(what, ": ", dim_names()[d], " measured=", measured[d],
         " expected=", body.truth.values[d],
         " tol=", body.truth.tolerance[d]);
    CHECK(std::abs(measured[d] - body.truth.values[d]) <=
          body.truth.tolerance[d]);
  }
}

}  // namespace

TEST_CASE("default body measures to its analytic ground truth") {
  const SynthBody body = generate_body(BodyParams{});
  check_within_truth(body, "default pose0");

  BodyParams p1;
  p1.pose = PoseTag::kPose1;
  p1.abduction_deg = 30.0;
  check_within_truth(generate_body(p1), "default pose1");
}

TEST_CASE("uniform scaling scales every dimension") {
  BodyParams base;
  const SynthBody small = generate_body(base.scaled(1.5 / 1.75));
  const SynthBody large = generate_body(base.scaled(2.0 / 1.75));
  for (int d = 0; d < kNumDims; ++d)
    CHECK(large.truth.values[d] / small.truth.values[d] ==
          doctest::Approx(2.0 / 1.5).epsilon(1e-9));
  check_within_truth(small, "scaled 1.5");
  check_within_truth(large, "scaled 2.0");
}

TEST_CASE("generation is deterministic: identical mesh bytes") {
  TempDir dir;
  const SynthBody a = generate_body(BodyParams{}, 7);
  const SynthBody b = generate_body(BodyParams{}, 7);
  save_mesh(a.mesh, dir.file("a.obj"));
  save_mesh(b.mesh, dir.file("b.obj"));
  std::ifstream fa(dir.file("a.obj")), fb(dir.file("b.obj"));
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(!sa.empty());
}

TEST_CASE("self-intersecting parameters are rejected") {
  BodyParams p;
  p.arm_radius = 0.2;  // cannot fit the lateral facet
  CHECK_THROWS_AS(generate_body(p), DataError);
  BodyParams q;
  q.leg_offset = 0.03;  // legs would merge at the midline
  q.leg_radius = 0.06;
  CHECK_THROWS_AS(generate_body(q), DataError);
  BodyParams r;
  r.facets = 15;
  CHECK_THROWS_AS(generate_body(r), DataError);
  BodyParams s;
  s.crotch_height = 1.4;
  CHECK_THROWS_AS(generate_body(s), DataError);
}

TEST_CASE("generated bodies are watertight: random slices all close") {
  std::mt19937_64 rng(17);
  const auto population = generate_population(3, 99);
  for (const auto& subj : population) {
    const Aabb box = compute_aabb(subj.body.mesh);
    for (int i = 0; i < 50; ++i) {
      const double y =
          uniform_range(rng, box.lo.y() + 1e-4, box.hi.y() - 1e-4);
      const auto curves =
          slice_mesh(subj.body.mesh, Plane{Vec3(0, y, 0), Vec3(0, 1, 0)});
      for (const auto& pl : curves) {
        INFO(subj.subject_id, " slice at y=", y);
        CHECK(pl.closed);
      }
    }
    // oblique slices as well
    for (int i = 0; i < 10; ++i) {
      const Plane plane{box.center() + 0.2 * random_unit(rng),
                        random_unit(rng)};
      for (const auto& pl : slice_mesh(subj.body.mesh, plane))
        CHECK(pl.closed);
    }
  }
}

TEST_CASE("population: structure, balance, determinism, spread") {
  const auto pop = generate_population(10, 7);
  REQUIRE(pop.size() == 20);  // two poses per subject

  std::set<std::string> ids;
  int female = 0, pose0 = 0;
  for (const auto& s : pop) {
    ids.insert(s.subject_id + "_" + to_string(s.pose));
    if (s.gender == Gender::kFemale) ++female;
    if (s.pose == PoseTag::kPose0) ++pose0;
  }
  CHECK(ids.size() == 20);
  CHECK(female == 10);
  CHECK(pose0 == 10);

  // same seed reproduces parameters exactly; different seed differs
  const auto again = generate_population(10, 7);
  CHECK(again[3].params.stature == pop[3].params.stature);
  const auto other = generate_population(10, 8);
  bool any_diff = false;
  for (size_t i = 0; i < pop.size(); ++i)
    if (other[i].params.stature != pop[i].params.stature) any_diff = true;
  CHECK(any_diff);

  // nonzero ground-truth spread in every dimension over a larger draw
  const auto big = generate_population(100, 3);
  for (int d = 0; d < kNumDims; ++d) {
    double mean = 0;
    for (const auto& s : big) mean += s.body.truth.values[d];
    mean /= static_cast<double>(big.size());
    double var = 0;
    for (const auto& s : big) {
      const double e = s.body.truth.values[d] - mean;
      var += e * e;
    }
    var /= static_cast<double>(big.size());
    INFO(dim_names()[d]);
    CHECK(var > 0.0);
  }
}

TEST_CASE("arm length delta produces the expected asymmetry") {
  BodyParams p;
  p.arm_length_delta = 0.02;
  const SynthBody body = generate_body(p);
  CHECK(body.truth.values[int(Dim::kRightArmLength)] >
        body.truth.values[int(Dim::kLeftArmLength)]);
  check_within_truth(body, "asymmetric arms");
}

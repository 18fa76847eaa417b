// Procedural humanoid generator with analytically known dimensions.
//
// A body is a small set of convex prisms joined through shared boundary
// loops: an elliptic-polygon trunk (pelvis/waist/chest bands) capped top and
// bottom, a neck and head stacked through flat annuli, arm prisms attached
// through rectangular collar holes in the trunk's flat side facets, and two
// free-standing leg prisms. Every surface is watertight by construction and
// every dimension of the result follows from the parameters in closed form,
// which is what makes these bodies usable as a measurement oracle.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anthro/types.hpp"

namespace anthro {

struct BodyParams {
  double stature = 1.75;          // total height, feet to head top
  double crotch_height = 0.80;    // trunk bottom cap = inseam ground truth
  double shoulder_half_span = 0.155;  // shoulder joints at x = -/+ span
  double arm_radius = 0.030;
  double arm_length = 0.52;       // collar to end cap along the arm axis
  double arm_length_delta = 0.0;  // right minus left
  double leg_radius = 0.055;
  double leg_offset = 0.082;      // leg axis distance from the midline
  double torso_width = 0.36;      // chest band extents (widest band)
  double torso_depth = 0.26;
  int facets = 16;                // cross-section vertex count, even, >= 16
  PoseTag pose = PoseTag::kPose0;
  double abduction_deg = 45.0;    // arm axis angle below horizontal

  // secondary proportions
  double waist_width_ratio = 0.78;   // vs chest
  double waist_depth_ratio = 0.79;
  double pelvis_width_ratio = 0.94;
  double pelvis_depth_ratio = 0.90;
  double neck_radius = 0.028;
  double head_half_width = 0.075;
  double head_half_depth = 0.085;

  // Uniformly scales every length field; angles, ratios and facet count are
  // dimensionless and stay put.
  BodyParams scaled(double s) const;
};

// Closed-form expected dimensions plus the per-dimension tolerance the
// construction supports (circumference/height/inseam are exact up to float
// noise; shoulder/arm paths are exact piecewise-linear sums quoted at 1%).
struct GroundTruth {
  HbdVector values = HbdVector::Zero();
  HbdVector tolerance = HbdVector::Zero();
};

struct SynthBody {
  TriMesh mesh;
  JointSet joints;
  GroundTruth truth;
};

// Deterministic in params; `seed` is recorded for provenance only. Throws
// DataError for parameter combinations that would self-intersect or break
// the landmark recipes.
SynthBody generate_body(const BodyParams& params, uint64_t seed = 0);

// Sampling ranges for generate_population. Length-like entries are fractions
// of the sampled stature.
struct ParamRanges {
  double stature_female[2] = {1.50, 1.80};
  double stature_male[2] = {1.60, 1.95};
  double crotch_frac[2] = {0.44, 0.49};
  double torso_width_frac[2] = {0.195, 0.215};
  double torso_depth_frac[2] = {0.142, 0.156};
  double span_frac_female[2] = {0.072, 0.078};
  double span_frac_male[2] = {0.076, 0.082};
  double arm_radius_frac[2] = {0.015, 0.018};
  double arm_length_frac[2] = {0.28, 0.32};
  double arm_delta_frac[2] = {-0.005, 0.005};
  double leg_radius_frac[2] = {0.026, 0.030};
  double leg_offset_frac[2] = {0.043, 0.047};
  double waist_width_ratio[2] = {0.74, 0.82};
  double waist_depth_ratio[2] = {0.74, 0.83};
  double pelvis_width_ratio_female[2] = {0.96, 1.02};
  double pelvis_width_ratio_male[2] = {0.90, 0.96};
  double pelvis_depth_ratio[2] = {0.86, 0.93};
  double neck_radius_frac[2] = {0.0145, 0.0165};
  double head_half_width_frac[2] = {0.040, 0.045};
  double head_half_depth_frac[2] = {0.046, 0.050};
  double pose0_abduction_deg = 45.0;
  double pose1_abduction_deg = 30.0;
  int facets = 16;
};

struct GeneratedSubject {
  std::string subject_id;
  Gender gender = Gender::kFemale;
  PoseTag pose = PoseTag::kPose0;
  BodyParams params;
  SynthBody body;
};

// n subjects (genders alternating), each in pose0 and pose1 -> 2n entries,
// ordered subject-major. Deterministic for a fixed seed.
std::vector<GeneratedSubject> generate_population(
    int n, uint64_t seed, const ParamRanges& ranges = {});

}  // namespace anthro

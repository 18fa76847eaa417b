#include "anthro/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace anthro {

void MeasurementConfig::validate() const {
  if (!(tol > 0.0 && tol < 0.01))
    throw DataError("measurement tolerance must be in (0, 0.01)");
  if (!(shoulder_plane_height_fraction > 0.0 &&
        shoulder_plane_height_fraction < 1.0))
    throw DataError("shoulder plane height fraction must be in (0, 1)");
}

namespace {

SurfaceLandmark first_hit(const TriMesh& mesh, const JointSet& joints,
                          const std::string& joint, const Vec3& dir,
                          const std::string& name) {
  const auto hits = ray_mesh_intersections(mesh, joints.at(joint), dir);
  if (hits.empty())
    throw DataError("no skin hit for ray from joint '" + joint +
                    "'; mesh/joints pairing is malformed");
  return SurfaceLandmark{name, hits.front().point, joint, dir};
}

SurfaceLandmark last_hit(const TriMesh& mesh, const JointSet& joints,
                         const std::string& joint, const Vec3& dir,
                         const std::string& name) {
  const auto hits = ray_mesh_intersections(mesh, joints.at(joint), dir);
  if (hits.empty())
    throw DataError("no skin hit for ray from joint '" + joint +
                    "'; mesh/joints pairing is malformed");
  return SurfaceLandmark{name, hits.back().point, joint, dir};
}

// The closed slice curve containing both landmarks within tol, with their
// positions. Open curves are rejected: they indicate a non-watertight region
// and no defensible closure exists.
struct LocatedCurve {
  Polyline curve;
  CurvePos pos_a, pos_b;
};

LocatedCurve find_curve_with(const std::vector<Polyline>& curves,
                             const Vec3& a, const Vec3& b, double tol,
                             const std::string& what) {
  std::ostringstream diag;
  for (const auto& curve : curves) {
    if (!curve.closed) continue;
    const auto pa = locate_on_curve(curve, a, tol);
    const auto pb = locate_on_curve(curve, b, tol);
    if (pa && pb) return LocatedCurve{curve, *pa, *pb};
  }
  // Build a diagnosis: nearest distance per curve to each landmark.
  diag << "no closed slice curve contains both " << what
       << " landmarks within tol;";
  int idx = 0;
  for (const auto& curve : curves) {
    auto nearest = [&](const Vec3& p) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index s = 0; s < curve.num_segments(); ++s) {
        const Vec3& sa = curve.segment_start(s);
        const Vec3 ab = curve.segment_end(s) - sa;
        const double len2 = ab.squaredNorm();
        double t = len2 > 0 ? (p - sa).dot(ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, (sa + t * ab - p).norm());
      }
      return best;
    };
    diag << " curve[" << idx++ << (curve.closed ? ",closed" : ",open")
         << "] d=(" << nearest(a) << ", " << nearest(b) << ")";
  }
  throw DataError(diag.str());
}

double min_x(const Polyline& curve) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : curve.points) m = std::min(m, p.x());
  return m;
}

double max_x(const Polyline& curve) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : curve.points) m = std::max(m, p.x());
  return m;
}

}  // namespace

LandmarkSet compute_landmarks(const TriMesh& mesh, const JointSet& joints) {
  joints.validate();
  validate_joints_in_bounds(joints, compute_aabb(mesh));
  LandmarkSet lm;
  lm.u_rs = first_hit(mesh, joints, "right_shoulder", Vec3::UnitY(), "u_rs");
  lm.u_ls = first_hit(mesh, joints, "left_shoulder", Vec3::UnitY(), "u_ls");
  lm.u_re = first_hit(mesh, joints, "right_elbow", -Vec3::UnitX(), "u_re");
  lm.u_le = first_hit(mesh, joints, "left_elbow", Vec3::UnitX(), "u_le");
  lm.u_rw = first_hit(mesh, joints, "right_wrist", -Vec3::UnitX(), "u_rw");
  lm.u_lw = first_hit(mesh, joints, "left_wrist", Vec3::UnitX(), "u_lw");
  lm.u_ch = last_hit(mesh, joints, "pelvis", -Vec3::UnitY(), "u_ch");
  if (!(lm.u_ch.point.y() < joints.at("pelvis").y()))
    throw DataError("crotch landmark is not below the pelvis joint");
  return lm;
}

double shoulder_width(const TriMesh& mesh, const JointSet& joints,
                      const MeasurementConfig& cfg) {
  cfg.validate();
  const LandmarkSet lm = compute_landmarks(mesh, joints);
  const Aabb box = compute_aabb(mesh);
  // Third plane point: body middle in x, configured height fraction in y,
  // thickest point of the whole mesh in z.
  const Vec3 p_c(box.center().x(),
                 box.lo.y() + cfg.shoulder_plane_height_fraction * box.height(),
                 box.hi.z());
  const Plane plane = plane_from_points(lm.u_rs.point, lm.u_ls.point, p_c);
  const auto curves = slice_mesh(mesh, plane);
  const auto located =
      find_curve_with(curves, lm.u_rs.point, lm.u_ls.point, cfg.tol,
                      "shoulder");
  const auto [sub1, sub2] =
      split_closed_curve(located.curve, located.pos_a, located.pos_b);
  return std::min(polyline_length(sub1), polyline_length(sub2));
}

double arm_length(const TriMesh& mesh, const JointSet& joints,
                  const MeasurementConfig& cfg, Side side) {
  cfg.validate();
  const LandmarkSet lm = compute_landmarks(mesh, joints);
  const bool right = side == Side::kRight;
  const Vec3& s = right ? lm.u_rs.point : lm.u_ls.point;
  const Vec3& e = right ? lm.u_re.point : lm.u_le.point;
  const Vec3& w = right ? lm.u_rw.point : lm.u_lw.point;
  const Plane plane = plane_from_points(s, e, w);
  const auto curves = slice_mesh(mesh, plane);
  const auto located = find_curve_with(curves, s, w, cfg.tol,
                                       right ? "right arm" : "left arm");
  const auto [sub1, sub2] =
      split_closed_curve(located.curve, located.pos_a, located.pos_b);
  if (right)
    return min_x(sub1) <= min_x(sub2) ? polyline_length(sub1)
                                      : polyline_length(sub2);
  return max_x(sub1) >= max_x(sub2) ? polyline_length(sub1)
                                    : polyline_length(sub2);
}

double inseam(const TriMesh& mesh, const JointSet& joints) {
  const LandmarkSet lm = compute_landmarks(mesh, joints);
  return lm.u_ch.point.y() - compute_aabb(mesh).lo.y();
}

double height(const TriMesh& mesh) { return compute_aabb(mesh).height(); }

double circumference(const TriMesh& mesh, const JointSet& joints,
                     const MeasurementConfig& cfg, CircumferenceLevel level) {
  cfg.validate();
  double y = 0.0;
  Vec3 axis = Vec3::Zero();
  switch (level) {
    case CircumferenceLevel::kChest: {
      const Vec3& j = joints.at(cfg.chest_joint);
      y = j.y();
      axis = j;
      break;
    }
    case CircumferenceLevel::kPelvis: {
      const Vec3& j = joints.at(cfg.pelvis_joint);
      y = j.y();
      axis = j;
      break;
    }
    case CircumferenceLevel::kWaist: {
      if (joints.has(cfg.waist_joint)) {
        const Vec3& j = joints.at(cfg.waist_joint);
        y = j.y();
        axis = j;
      } else if (cfg.waist_fallback) {
        const Vec3& p = joints.at(cfg.pelvis_joint);
        const Vec3& c = joints.at(cfg.chest_joint);
        axis = 0.5 * (p + c);
        y = axis.y();
      } else {
        throw DataError("missing joint: " + cfg.waist_joint);
      }
      break;
    }
  }
  const Plane plane{Vec3(0.0, y, 0.0), Vec3::UnitY()};
  const auto curves = slice_mesh(mesh, plane);
  const Vec3 axis_point(axis.x(), y, axis.z());
  for (const auto& curve : curves) {
    if (!curve.closed) continue;
    if (curve_encloses_point(curve, plane, axis_point))
      return convex_hull_perimeter(curve, plane);
  }
  std::ostringstream os;
  os << "no closed contour at height " << y << " encloses the body axis";
  throw DataError(os.str());
}

HbdVector measure_all(const TriMesh& mesh, const JointSet& joints,
                      const MeasurementConfig& cfg) {
  HbdVector out;
  auto run = [&](Dim dim, auto&& fn) {
    try {
      out[static_cast<int>(dim)] = fn();
    } catch (const Error& e) {
      throw DataError(dim_names()[static_cast<int>(dim)] + ": " + e.what());
    }
  };
  run(Dim::kShoulderWidth, [&] { return shoulder_width(mesh, joints, cfg); });
  run(Dim::kRightArmLength,
      [&] { return arm_length(mesh, joints, cfg, Side::kRight); });
  run(Dim::kLeftArmLength,
      [&] { return arm_length(mesh, joints, cfg, Side::kLeft); });
  run(Dim::kInseam, [&] { return inseam(mesh, joints); });
  run(Dim::kChestCircumference, [&] {
    return circumference(mesh, joints, cfg, CircumferenceLevel::kChest);
  });
  run(Dim::kWaistCircumference, [&] {
    return circumference(mesh, joints, cfg, CircumferenceLevel::kWaist);
  });
  run(Dim::kPelvisCircumference, [&] {
    return circumference(mesh, joints, cfg, CircumferenceLevel::kPelvis);
  });
  run(Dim::kHeight, [&] { return height(mesh); });
  validate_hbd(out);
  return out;
}

}  // namespace anthro

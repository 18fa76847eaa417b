// The eight body-dimension procedures. Landmarks are skin points found by
// casting rays from skeleton joints; lengths are path lengths of slice
// subcurves between landmarks; circumferences are convex-hull perimeters of
// horizontal slice contours.
#pragma once

#include <string>

#include "anthro/geometry.hpp"
#include "anthro/types.hpp"

namespace anthro {

// A point on the mesh skin, found as a ray-mesh intersection.
struct SurfaceLandmark {
  std::string name;
  Vec3 point = Vec3::Zero();
  std::string source_joint;
  Vec3 ray_dir = Vec3::Zero();
};

// The seven ray landmarks. Shoulder rays go up (+y) and land on top of the
// shoulders; elbow/wrist rays go outward toward the near lateral bounding
// face (-x right, +x left); the crotch landmark is the LAST downward skin
// crossing under the pelvis joint.
struct LandmarkSet {
  SurfaceLandmark u_rs, u_ls;  // shoulders
  SurfaceLandmark u_re, u_le;  // elbows
  SurfaceLandmark u_rw, u_lw;  // wrists
  SurfaceLandmark u_ch;        // crotch
};

struct MeasurementConfig {
  double tol = 0.001;  // landmark-on-curve tolerance, meters
  double shoulder_plane_height_fraction = 0.65;
  std::string chest_joint = "chest";
  std::string waist_joint = "waist";
  std::string pelvis_joint = "pelvis";
  // With no waist joint, slice at the midpoint of pelvis and chest heights.
  bool waist_fallback = true;

  void validate() const;
};

enum class Side { kRight, kLeft };
enum class CircumferenceLevel { kChest, kWaist, kPelvis };

LandmarkSet compute_landmarks(const TriMesh& mesh, const JointSet& joints);

// Shorter subcurve between the shoulder landmarks on the slice through
// (u_rs, u_ls, p_c), where p_c sits at the configured height fraction on
// the body's thickest-point axis.
double shoulder_width(const TriMesh& mesh, const JointSet& joints,
                      const MeasurementConfig& cfg = {});

// Skin path between shoulder and wrist landmarks along the slice through the
// side's shoulder/elbow/wrist landmarks; of the two subcurves the one with
// the more extreme lateral reach (min x right, max x left) is the arm.
double arm_length(const TriMesh& mesh, const JointSet& joints,
                  const MeasurementConfig& cfg, Side side);

// Vertical distance from the crotch landmark to the bounding-box floor.
double inseam(const TriMesh& mesh, const JointSet& joints);

// Bounding-box height.
double height(const TriMesh& mesh);

// Convex-hull perimeter of the horizontal slice at the level joint's height,
// taken from the closed contour enclosing the joint's body axis.
double circumference(const TriMesh& mesh, const JointSet& joints,
                     const MeasurementConfig& cfg, CircumferenceLevel level);

// All eight dimensions in canonical order. Errors from components are
// annotated with the dimension name.
HbdVector measure_all(const TriMesh& mesh, const JointSet& joints,
                      const MeasurementConfig& cfg = {});

}  // namespace anthro

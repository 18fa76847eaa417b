// Core data model: triangle meshes, skeleton joints, bounding boxes and the
// eight-dimension measurement vector. All lengths are meters, y is up, the
// subject faces +z and the subject's right side is -x.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace anthro {

using Vec3 = Eigen::Vector3d;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (OBJ/JSON/PGM/...). Carries a human-readable location.
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input that violates a domain invariant or makes an
// operation unsatisfiable (degenerate faces, missing joints, no-hit rays...).
struct DataError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// TriMesh

// Indexed triangle surface. V is n x 3 vertex positions, F is m x 3 vertex
// indices (0-based in memory; OBJ files are 1-based and converted on load).
struct TriMesh {
  Eigen::MatrixX3d V;
  Eigen::MatrixX3i F;

  Eigen::Index num_vertices() const { return V.rows(); }
  Eigen::Index num_faces() const { return F.rows(); }

  Vec3 vertex(Eigen::Index i) const { return V.row(i).transpose(); }

  void corners(Eigen::Index f, Vec3& a, Vec3& b, Vec3& c) const {
    a = V.row(F(f, 0)).transpose();
    b = V.row(F(f, 1)).transpose();
    c = V.row(F(f, 2)).transpose();
  }
};

inline double face_area(const TriMesh& m, Eigen::Index f) {
  Vec3 a, b, c;
  m.corners(f, a, b, c);
  return 0.5 * (b - a).cross(c - a).norm();
}

// Face area below this is a degenerate face and rejected at load.
inline constexpr double kDegenerateFaceArea = 1e-12;

// Throws DataError on out-of-range indices, non-finite coordinates or
// degenerate faces (all offenders listed).
void validate_mesh(const TriMesh& mesh);

// ---------------------------------------------------------------------------
// Aabb

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 diagonal() const { return hi - lo; }
  double height() const { return hi.y() - lo.y(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

// Exact componentwise extrema of the vertex set. Throws DataError on an
// empty mesh.
Aabb compute_aabb(const TriMesh& mesh);

// ---------------------------------------------------------------------------
// JointSet

// Named interior skeleton points. The seven required joints drive the
// landmark rays; chest/waist are optional and control circumference planes.
class JointSet {
 public:
  static const std::vector<std::string>& required_names();

  bool has(const std::string& name) const { return joints_.count(name) != 0; }
  const Vec3& at(const std::string& name) const;
  void set(const std::string& name, const Vec3& p) { joints_[name] = p; }

  const std::map<std::string, Vec3>& all() const { return joints_; }

  // Missing required names or non-finite coordinates throw DataError.
  void validate() const;

 private:
  std::map<std::string, Vec3> joints_;
};

// Pairing-time invariant: every joint must lie inside the mesh bounds.
void validate_joints_in_bounds(const JointSet& joints, const Aabb& box);

// ---------------------------------------------------------------------------
// HbdVector

// The eight body dimensions, fixed order, meters.
enum class Dim : int {
  kShoulderWidth = 0,
  kRightArmLength = 1,
  kLeftArmLength = 2,
  kInseam = 3,
  kChestCircumference = 4,
  kWaistCircumference = 5,
  kPelvisCircumference = 6,
  kHeight = 7,
};

inline constexpr int kNumDims = 8;

using HbdVector = Eigen::Matrix<double, kNumDims, 1>;

const std::array<std::string, kNumDims>& dim_names();
const std::array<std::string, kNumDims>& dim_labels();  // report form

// All entries must be finite, > 0 and < 3 m.
void validate_hbd(const HbdVector& v);

// ---------------------------------------------------------------------------
// Subject records

enum class Gender { kFemale, kMale };
enum class PoseTag { kPose0, kPose1 };

std::string to_string(Gender g);
std::string to_string(PoseTag p);
Gender gender_from_string(const std::string& s);
PoseTag pose_from_string(const std::string& s);

// One dataset entry: a posed mesh with joints and (optionally) its measured
// dimensions. Paths are relative to the manifest location.
struct SubjectRecord {
  std::string id;
  std::string mesh_path;
  std::string joints_path;
  std::string truth_path;  // empty if absent
  Gender gender = Gender::kFemale;
  PoseTag pose = PoseTag::kPose0;
  std::optional<HbdVector> truth;
};

}  // namespace anthro

#include "anthro/mesh_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace anthro {

namespace {

using json = nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw ParseError(os.str());
}

}  // namespace

void validate_mesh(const TriMesh& mesh) {
  if (!mesh.V.allFinite())
    throw DataError("mesh has non-finite vertex coordinates");
  const Eigen::Index nv = mesh.num_vertices();
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int idx = mesh.F(f, k);
      if (idx < 0 || idx >= nv) {
        std::ostringstream os;
        os << "face " << f << " references vertex " << idx << " (mesh has "
           << nv << " vertices)";
        throw DataError(os.str());
      }
    }
  }
  std::vector<Eigen::Index> degenerate;
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f)
    if (face_area(mesh, f) < kDegenerateFaceArea) degenerate.push_back(f);
  if (!degenerate.empty()) {
    std::ostringstream os;
    os << "degenerate faces (area < 1e-12 m^2):";
    for (auto f : degenerate) os << " " << f;
    throw DataError(os.str());
  }
}

Aabb compute_aabb(const TriMesh& mesh) {
  if (mesh.num_vertices() == 0) throw DataError("empty mesh has no bounds");
  Aabb box;
  box.lo = mesh.V.colwise().minCoeff().transpose();
  box.hi = mesh.V.colwise().maxCoeff().transpose();
  return box;
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);

  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        parse_fail(path, lineno, "malformed vertex record");
      if (!p.allFinite())
        parse_fail(path, lineno, "non-finite vertex coordinate");
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ls >> tok) {
        // accept i, i/t, i//n, i/t/n; only the vertex index matters
        const std::string head = tok.substr(0, tok.find('/'));
        long v = 0;
        try {
          size_t used = 0;
          v = std::stol(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          parse_fail(path, lineno, "malformed face index '" + tok + "'");
        }
        idx.push_back(v);
      }
      if (idx.size() != 3) {
        std::ostringstream os;
        os << "face with " << idx.size()
           << " vertices; only triangles are supported";
        parse_fail(path, lineno, os.str());
      }
      Eigen::Vector3i f;
      for (int k = 0; k < 3; ++k) {
        const long v = idx[k];
        if (v < 1 || v > static_cast<long>(verts.size())) {
          std::ostringstream os;
          os << "face index " << v << " out of range [1, " << verts.size()
             << "]";
          parse_fail(path, lineno, os.str());
        }
        f[k] = static_cast<int>(v - 1);
      }
      faces.push_back(f);
    }
    // all other record types ignored
  }

  TriMesh mesh;
  mesh.V.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.V.row(i) = verts[i];
  mesh.F.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t i = 0; i < faces.size(); ++i) mesh.F.row(i) = faces[i];
  validate_mesh(mesh);
  return mesh;
}

void save_mesh(const TriMesh& mesh, const std::string& path,
               const std::string& header) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file: " + path);
  if (!header.empty()) {
    std::istringstream hs(header);
    std::string hl;
    while (std::getline(hs, hl)) out << "# " << hl << "\n";
  }
  char buf[96];
  for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", mesh.V(i, 0),
                  mesh.V(i, 1), mesh.V(i, 2));
    out << buf;
  }
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f)
    out << "f " << mesh.F(f, 0) + 1 << " " << mesh.F(f, 1) + 1 << " "
        << mesh.F(f, 2) + 1 << "\n";
  if (!out) throw Error("short write: " + path);
}

const std::vector<std::string>& JointSet::required_names() {
  static const std::vector<std::string> names = {
      "right_shoulder", "left_shoulder", "right_elbow", "left_elbow",
      "right_wrist",    "left_wrist",    "pelvis"};
  return names;
}

const Vec3& JointSet::at(const std::string& name) const {
  auto it = joints_.find(name);
  if (it == joints_.end()) throw DataError("missing joint: " + name);
  return it->second;
}

void JointSet::validate() const {
  for (const auto& name : required_names())
    if (!has(name)) throw DataError("missing required joint: " + name);
  for (const auto& [name, p] : joints_)
    if (!p.allFinite())
      throw DataError("joint '" + name + "' has non-finite coordinates");
}

void validate_joints_in_bounds(const JointSet& joints, const Aabb& box) {
  for (const auto& [name, p] : joints.all())
    if (!box.contains(p))
      throw DataError("joint '" + name +
                      "' lies outside the mesh bounding box");
}

JointSet load_joints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open joints file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": expected a JSON object");
  JointSet joints;
  for (auto& [name, val] : j.items()) {
    if (name == "provenance") continue;
    if (!val.is_array() || val.size() != 3)
      throw ParseError(path + ": joint '" + name + "' is not an [x,y,z] array");
    joints.set(name, Vec3(val[0].get<double>(), val[1].get<double>(),
                          val[2].get<double>()));
  }
  joints.validate();
  return joints;
}

void save_joints(const JointSet& joints, const std::string& path,
                 const std::string& provenance) {
  json j = json::object();
  for (const auto& [name, p] : joints.all()) j[name] = {p.x(), p.y(), p.z()};
  if (!provenance.empty()) j["provenance"] = json::parse(provenance);
  std::ofstream out(path);
  if (!out) throw Error("cannot write joints file: " + path);
  out << j.dump(2) << "\n";
}

const std::array<std::string, kNumDims>& dim_names() {
  static const std::array<std::string, kNumDims> names = {
      "shoulder_width",      "right_arm_length",   "left_arm_length",
      "inseam",              "chest_circumference", "waist_circumference",
      "pelvis_circumference", "height"};
  return names;
}

const std::array<std::string, kNumDims>& dim_labels() {
  static const std::array<std::string, kNumDims> labels = {
      "Shoulder width",      "Right arm length",   "Left arm length",
      "Inseam/crotch height", "Chest circumference", "Waist circumference",
      "Pelvis circumference", "Height"};
  return labels;
}

void validate_hbd(const HbdVector& v) {
  for (int i = 0; i < kNumDims; ++i) {
    if (!std::isfinite(v[i]) || v[i] <= 0.0 || v[i] >= 3.0) {
      std::ostringstream os;
      os << "dimension '" << dim_names()[i] << "' = " << v[i]
         << " outside (0, 3) m";
      throw DataError(os.str());
    }
  }
}

std::string to_string(Gender g) {
  return g == Gender::kFemale ? "female" : "male";
}

std::string to_string(PoseTag p) {
  return p == PoseTag::kPose0 ? "pose0" : "pose1";
}

Gender gender_from_string(const std::string& s) {
  if (s == "female") return Gender::kFemale;
  if (s == "male") return Gender::kMale;
  throw DataError("unknown gender tag: " + s);
}

PoseTag pose_from_string(const std::string& s) {
  if (s == "pose0") return PoseTag::kPose0;
  if (s == "pose1") return PoseTag::kPose1;
  throw DataError("unknown pose tag: " + s);
}

}  // namespace anthro

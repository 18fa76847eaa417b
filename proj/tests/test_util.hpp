// Shared fixtures and independent reference implementations for the test
// suites. The oracles here deliberately avoid the library's code paths:
// ray hits solve a 3x3 linear system per triangle, slicing extracts raw
// per-triangle segments, and the hull check is the O(n^3) all-on-one-side
// edge test.
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "anthro/geometry.hpp"
#include "anthro/rng.hpp"
#include "anthro/types.hpp"

namespace anthro::test {

// --------------------------------------------------------------------------
// fixtures

inline TriMesh make_cube(const Vec3& center = Vec3::Zero(), double size = 1.0) {
  TriMesh m;
  const double h = 0.5 * size;
  m.V.resize(8, 3);
  int idx = 0;
  for (int zi : {-1, 1})
    for (int yi : {-1, 1})
      for (int xi : {-1, 1})
        m.V.row(idx++) = (center + Vec3(xi * h, yi * h, zi * h)).transpose();
  // outward-wound faces (verified by the signed-volume test below)
  const int F[12][3] = {{0, 2, 3}, {0, 3, 1},     // z = -h
                        {4, 5, 7}, {4, 7, 6},     // z = +h
                        {0, 1, 5}, {0, 5, 4},     // y = -h
                        {2, 6, 7}, {2, 7, 3},     // y = +h
                        {0, 4, 6}, {0, 6, 2},     // x = -h
                        {1, 3, 7}, {1, 7, 5}};    // x = +h
  m.F.resize(12, 3);
  for (int f = 0; f < 12; ++f)
    m.F.row(f) = Eigen::Vector3i(F[f][0], F[f][1], F[f][2]);
  return m;
}

// Closed vertical cylinder (n side facets + fan caps), axis x = cx, z = cz.
inline TriMesh make_cylinder(double radius, int n, double y0, double y1,
                             double cx = 0.0, double cz = 0.0) {
  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> faces;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;
    verts.emplace_back(cx + radius * std::cos(a), y0,
                       cz + radius * std::sin(a));
  }
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;
    verts.emplace_back(cx + radius * std::cos(a), y1,
                       cz + radius * std::sin(a));
  }
  const int c0 = static_cast<int>(verts.size());
  verts.emplace_back(cx, y0, cz);
  const int c1 = static_cast<int>(verts.size());
  verts.emplace_back(cx, y1, cz);
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    faces.emplace_back(k1, k, n + k);        // side
    faces.emplace_back(k1, n + k, n + k1);
    faces.emplace_back(c0, k, k1);           // bottom, facing down
    faces.emplace_back(c1, n + k1, n + k);   // top, facing up
  }
  TriMesh m;
  m.V.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) m.V.row(i) = verts[i];
  m.F.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t i = 0; i < faces.size(); ++i) m.F.row(i) = faces[i];
  return m;
}

inline TriMesh mirror_x(const TriMesh& mesh) {
  TriMesh out = mesh;
  out.V.col(0) = -out.V.col(0).eval();
  out.F.col(1).swap(out.F.col(2));  // restore outward winding
  return out;
}

inline JointSet mirror_x(const JointSet& joints) {
  auto flip = [](std::string name) {
    if (name.rfind("right_", 0) == 0) return "left_" + name.substr(6);
    if (name.rfind("left_", 0) == 0) return "right_" + name.substr(5);
    return name;
  };
  JointSet out;
  for (const auto& [name, p] : joints.all())
    out.set(flip(name), Vec3(-p.x(), p.y(), p.z()));
  return out;
}

inline TriMesh transformed(const TriMesh& mesh, const Eigen::Matrix3d& R,
                           const Vec3& t) {
  TriMesh out = mesh;
  out.V = (mesh.V * R.transpose()).rowwise() + t.transpose();
  return out;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate = base / ("anthro_test_" + std::to_string(::getpid()) +
                               "_" + std::to_string(i));
      if (std::filesystem::create_directory(candidate)) {
        path = candidate;
        break;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// --------------------------------------------------------------------------
// oracles

// Per-triangle ray intersection via a 3x3 linear solve; no early-out, no
// merging of shared-edge hits.
inline std::vector<double> oracle_ray_hits(const TriMesh& mesh,
                                           const Vec3& origin,
                                           const Vec3& dir) {
  std::vector<double> ts;
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    Vec3 a, b, c;
    mesh.corners(f, a, b, c);
    Eigen::Matrix3d M;
    M.col(0) = dir;
    M.col(1) = a - b;
    M.col(2) = a - c;
    if (std::abs(M.determinant()) < 1e-14) continue;
    const Vec3 sol = M.inverse() * (a - origin);
    const double t = sol[0], u = sol[1], v = sol[2];
    if (t > 1e-9 && u >= -1e-12 && v >= -1e-12 && u + v <= 1.0 + 1e-12)
      ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

struct OracleSegment {
  Vec3 a, b;
};

// Raw plane crossings per triangle with the documented on-plane vertex nudge
// (+2e-9 along the normal); no chaining.
inline std::vector<OracleSegment> oracle_slice_segments(const TriMesh& mesh,
                                                        const Plane& plane) {
  std::vector<OracleSegment> segs;
  std::vector<double> d(mesh.num_vertices());
  for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
    d[i] = plane.signed_distance(mesh.vertex(i));
    if (std::abs(d[i]) < 1e-9) d[i] += 2e-9;
  }
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    std::vector<Vec3> pts;
    for (int e = 0; e < 3; ++e) {
      const int i = mesh.F(f, e), j = mesh.F(f, (e + 1) % 3);
      if ((d[i] > 0) != (d[j] > 0)) {
        const double t = d[i] / (d[i] - d[j]);
        pts.push_back(mesh.vertex(i) + t * (mesh.vertex(j) - mesh.vertex(i)));
      }
    }
    if (pts.size() == 2 && (pts[0] - pts[1]).norm() > kChainEps)
      segs.push_back({pts[0], pts[1]});
  }
  return segs;
}

// O(n^3) hull perimeter: a directed pair is a maximal hull edge iff every
// other point lies strictly to its left, or on the line within the segment
// (collinear interior points do not disqualify the long edge).
inline double oracle_hull_perimeter(
    const std::vector<Eigen::Vector2d>& pts) {
  const size_t n = pts.size();
  constexpr double kColinearEps = 1e-12;
  double perim = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Eigen::Vector2d e = pts[j] - pts[i];
      bool edge = true;
      for (size_t k = 0; k < n && edge; ++k) {
        if (k == i || k == j) continue;
        const Eigen::Vector2d v = pts[k] - pts[i];
        const double cross = e.x() * v.y() - e.y() * v.x();
        if (cross > kColinearEps) continue;
        if (cross < -kColinearEps) {
          edge = false;
        } else {
          const double t = v.dot(e) / e.squaredNorm();
          if (t < -kColinearEps || t > 1.0 + kColinearEps) edge = false;
        }
      }
      if (edge) perim += e.norm();
    }
  return perim;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  while (true) {
    Vec3 v(uniform_range(rng, -1, 1), uniform_range(rng, -1, 1),
           uniform_range(rng, -1, 1));
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

}  // namespace anthro::test

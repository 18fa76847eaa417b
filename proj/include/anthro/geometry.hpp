// Measurement geometry: ray-mesh intersection, plane-mesh slicing into
// polylines, landmark location on curves, curve splitting, path length and
// convex-hull perimeter. Pure functions of immutable inputs.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "anthro/types.hpp"

namespace anthro {

// Segment-to-polyline assembly tolerance. Far below measurement precision
// (mm) and far above double noise at body scale.
inline constexpr double kChainEps = 1e-7;

// Vertices closer than this to a slicing plane get nudged off it.
inline constexpr double kOnPlaneEps = 1e-9;

// Minimum accepted ray parameter; hits at the origin are discarded.
inline constexpr double kRayMinT = 1e-9;

struct Plane {
  Vec3 origin = Vec3::Zero();
  Vec3 normal = Vec3::UnitY();  // unit length

  double signed_distance(const Vec3& p) const {
    return normal.dot(p - origin);
  }
};

// Normalizes `normal`; throws DataError if it is (near) zero.
Plane make_plane(const Vec3& origin, const Vec3& normal);

// Plane through three non-colinear points (triangle area > 1e-10 m^2).
Plane plane_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3);

// Ordered boundary curve. A closed curve does not duplicate its first point;
// the closing segment is implicit.
struct Polyline {
  std::vector<Vec3> points;
  bool closed = false;

  Eigen::Index num_points() const {
    return static_cast<Eigen::Index>(points.size());
  }
  // Segments are points[i] -> points[i+1], plus the closing segment when
  // closed.
  Eigen::Index num_segments() const {
    return closed ? num_points() : num_points() - 1;
  }
  const Vec3& segment_start(Eigen::Index s) const { return points[s]; }
  const Vec3& segment_end(Eigen::Index s) const {
    return points[(s + 1) % points.size()];
  }
};

struct RayHit {
  double t = 0.0;         // ray parameter, ascending in the result list
  Vec3 point = Vec3::Zero();
  Eigen::Index face = -1;  // one of the triangles producing the hit
};

// All skin crossings of origin + t*dir for t > kRayMinT, ascending in t.
// Hits within 1e-9 in t are merged (shared-edge and shared-vertex crossings
// count once). `dir` must be unit length. Empty when the ray misses.
std::vector<RayHit> ray_mesh_intersections(const TriMesh& mesh,
                                           const Vec3& origin,
                                           const Vec3& dir);

// Cross-section of the mesh by the plane as chained polylines. Segments from
// adjacent triangles are joined where their endpoints coincide within
// kChainEps; a polyline is closed iff its ends meet within kChainEps. On a
// watertight mesh every output is closed. Empty when the plane misses.
std::vector<Polyline> slice_mesh(const TriMesh& mesh, const Plane& plane);

// Position on a polyline: a point inside segment `segment` at fraction `t`.
struct CurvePos {
  Eigen::Index segment = 0;
  double t = 0.0;  // 0 = segment start, 1 = segment end
};

Vec3 point_at(const Polyline& curve, const CurvePos& pos);

// Position minimizing distance to `target`, or nullopt if that minimum
// exceeds `tol`.
std::optional<CurvePos> locate_on_curve(const Polyline& curve,
                                        const Vec3& target, double tol);

// Splits a closed curve at two distinct positions into two open polylines,
// both running from a's point to b's point (split points become vertices).
// The two lengths sum to the closed curve's length.
std::pair<Polyline, Polyline> split_closed_curve(const Polyline& curve,
                                                 const CurvePos& a,
                                                 const CurvePos& b);

// Sum of consecutive-point distances; includes the closing segment for
// closed curves.
double polyline_length(const Polyline& curve);

// Perimeter of the 2D convex hull of the curve's points projected into the
// plane. Throws DataError for fewer than 3 points or a colinear point set.
double convex_hull_perimeter(const Polyline& curve, const Plane& plane);

// In-plane even-odd containment test of `p` against a closed curve lying in
// `plane` (used to pick the body contour among several slice loops).
bool curve_encloses_point(const Polyline& curve, const Plane& plane,
                          const Vec3& p);

}  // namespace anthro

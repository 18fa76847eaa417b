#include "anthro/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace anthro {

namespace {

// Packed undirected edge id; vertex indices fit in 32 bits.
inline uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
         static_cast<uint32_t>(b);
}

constexpr double kBaryEps = 1e-12;

}  // namespace

Plane make_plane(const Vec3& origin, const Vec3& normal) {
  const double n = normal.norm();
  if (n < 1e-12) throw DataError("plane normal is zero");
  return Plane{origin, normal / n};
}

Plane plane_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  const Vec3 cross = (p2 - p1).cross(p3 - p1);
  if (0.5 * cross.norm() < 1e-10)
    throw DataError("colinear points define no plane");
  return Plane{p1, cross.normalized()};
}

std::vector<RayHit> ray_mesh_intersections(const TriMesh& mesh,
                                           const Vec3& origin,
                                           const Vec3& dir) {
  std::vector<RayHit> hits;
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    Vec3 a, b, c;
    mesh.corners(f, a, b, c);
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = dir.cross(e2);
    const double det = e1.dot(pvec);
    if (std::abs(det) < 1e-14) continue;  // parallel
    const double inv = 1.0 / det;
    const Vec3 tvec = origin - a;
    const double u = tvec.dot(pvec) * inv;
    if (u < -kBaryEps || u > 1.0 + kBaryEps) continue;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv;
    if (v < -kBaryEps || u + v > 1.0 + kBaryEps) continue;
    const double t = e2.dot(qvec) * inv;
    if (t <= kRayMinT) continue;
    hits.push_back(RayHit{t, origin + t * dir, f});
  }
  std::sort(hits.begin(), hits.end(),
            [](const RayHit& l, const RayHit& r) { return l.t < r.t; });
  // merge shared-edge/vertex crossings
  std::vector<RayHit> merged;
  for (const auto& h : hits) {
    if (!merged.empty() && h.t - merged.back().t <= 1e-9) continue;
    merged.push_back(h);
  }
  return merged;
}

std::vector<Polyline> slice_mesh(const TriMesh& mesh, const Plane& plane) {
  const Eigen::Index nv = mesh.num_vertices();
  Eigen::VectorXd d(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    double di = plane.signed_distance(mesh.vertex(i));
    if (std::abs(di) < kOnPlaneEps) di += 2.0 * kOnPlaneEps;
    d[i] = di;
  }

  struct Segment {
    uint64_t ka, kb;
  };
  std::vector<Segment> segments;
  std::unordered_map<uint64_t, Vec3> crossing;      // edge id -> point
  std::unordered_map<uint64_t, std::vector<int>> incident;

  auto cross_point = [&](int i, int j) -> uint64_t {
    if (i > j) std::swap(i, j);  // canonical orientation: shared edges match
    const uint64_t key = edge_key(i, j);
    if (!crossing.count(key)) {
      const double t = d[i] / (d[i] - d[j]);
      crossing.emplace(key,
                       mesh.vertex(i) + t * (mesh.vertex(j) - mesh.vertex(i)));
    }
    return key;
  };

  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const int i0 = mesh.F(f, 0), i1 = mesh.F(f, 1), i2 = mesh.F(f, 2);
    const bool s0 = d[i0] > 0, s1 = d[i1] > 0, s2 = d[i2] > 0;
    if (s0 == s1 && s1 == s2) continue;
    uint64_t keys[2];
    int n = 0;
    if (s0 != s1) keys[n++] = cross_point(i0, i1);
    if (s1 != s2) keys[n++] = cross_point(i1, i2);
    if (s2 != s0 && n < 2) keys[n++] = cross_point(i2, i0);
    if (n != 2) continue;
    const int seg = static_cast<int>(segments.size());
    segments.push_back(Segment{keys[0], keys[1]});
    incident[keys[0]].push_back(seg);
    incident[keys[1]].push_back(seg);
  }

  // Chain segments through shared edge crossings. On a manifold every
  // crossing has exactly two incident segments; walks stop at boundaries or
  // non-manifold junctions.
  std::vector<char> used(segments.size(), 0);
  struct Chain {
    std::deque<Vec3> pts;
    bool closed = false;
  };
  std::vector<Chain> chains;

  auto next_unused = [&](uint64_t key, int avoid) -> int {
    for (int s : incident[key])
      if (!used[s] && s != avoid) return s;
    return -1;
  };

  for (size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = 1;
    std::deque<uint64_t> keys{segments[s0].ka, segments[s0].kb};
    Chain chain;
    // forward
    while (true) {
      if (keys.back() == keys.front()) {
        chain.closed = true;
        break;
      }
      const int s = next_unused(keys.back(), -1);
      if (s < 0) break;
      used[s] = 1;
      keys.push_back(segments[s].ka == keys.back() ? segments[s].kb
                                                   : segments[s].ka);
    }
    // backward
    while (!chain.closed) {
      const int s = next_unused(keys.front(), -1);
      if (s < 0) break;
      used[s] = 1;
      keys.push_front(segments[s].ka == keys.front() ? segments[s].kb
                                                     : segments[s].ka);
      if (keys.back() == keys.front()) {
        chain.closed = true;
        keys.pop_back();  // repeated key, drop one copy
      }
    }
    if (chain.closed && keys.back() == keys.front()) keys.pop_back();
    for (uint64_t k : keys) chain.pts.push_back(crossing[k]);
    chains.push_back(std::move(chain));
  }

  // Epsilon merge of open chains whose endpoints coincide (boundary seams on
  // non-watertight input).
  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    for (size_t i = 0; i < chains.size() && !merged_any; ++i) {
      if (chains[i].closed || chains[i].pts.empty()) continue;
      for (size_t j = i + 1; j < chains.size() && !merged_any; ++j) {
        if (chains[j].closed || chains[j].pts.empty()) continue;
        auto& a = chains[i].pts;
        auto& b = chains[j].pts;
        auto near = [](const Vec3& p, const Vec3& q) {
          return (p - q).norm() <= kChainEps;
        };
        if (near(a.back(), b.front())) {
          a.insert(a.end(), b.begin() + 1, b.end());
        } else if (near(a.back(), b.back())) {
          a.insert(a.end(), b.rbegin() + 1, b.rend());
        } else if (near(a.front(), b.back())) {
          a.insert(a.begin(), b.begin(), b.end() - 1);
        } else if (near(a.front(), b.front())) {
          a.insert(a.begin(), b.rbegin(), b.rend() - 1);
        } else {
          continue;
        }
        b.clear();
        merged_any = true;
      }
    }
  }

  std::vector<Polyline> out;
  for (auto& chain : chains) {
    if (chain.pts.empty()) continue;
    if (!chain.closed && chain.pts.size() >= 3 &&
        (chain.pts.front() - chain.pts.back()).norm() <= kChainEps) {
      chain.closed = true;
      chain.pts.pop_back();
    }
    Polyline pl;
    pl.closed = chain.closed;
    for (const auto& p : chain.pts)
      if (pl.points.empty() || (p - pl.points.back()).norm() > kChainEps)
        pl.points.push_back(p);
    if (pl.closed && pl.points.size() >= 2 &&
        (pl.points.front() - pl.points.back()).norm() <= kChainEps)
      pl.points.pop_back();
    if (pl.closed ? pl.points.size() >= 3 : pl.points.size() >= 2)
      out.push_back(std::move(pl));
  }
  return out;
}

Vec3 point_at(const Polyline& curve, const CurvePos& pos) {
  const Vec3& a = curve.segment_start(pos.segment);
  const Vec3& b = curve.segment_end(pos.segment);
  return a + pos.t * (b - a);
}

std::optional<CurvePos> locate_on_curve(const Polyline& curve,
                                        const Vec3& target, double tol) {
  if (tol <= 0.0) throw DataError("tolerance must be positive");
  CurvePos best;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < curve.num_segments(); ++s) {
    const Vec3& a = curve.segment_start(s);
    const Vec3& b = curve.segment_end(s);
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (target - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dist = (a + t * ab - target).norm();
    if (dist < best_d) {
      best_d = dist;
      best = CurvePos{s, t};
    }
  }
  if (best_d > tol) return std::nullopt;
  return best;
}

namespace {

// Open walk along a closed curve from position `from` forward to `to`.
Polyline forward_walk(const Polyline& curve, const CurvePos& from,
                      const CurvePos& to) {
  const Eigen::Index n = curve.num_segments();
  Polyline out;
  auto push = [&out](const Vec3& p) {
    if (out.points.empty() || (p - out.points.back()).norm() > 1e-12)
      out.points.push_back(p);
  };
  push(point_at(curve, from));
  if (from.segment == to.segment && to.t > from.t) {
    push(point_at(curve, to));
    return out;
  }
  Eigen::Index s = from.segment;
  push(curve.segment_end(s));
  s = (s + 1) % n;
  while (s != to.segment) {
    push(curve.segment_end(s));
    s = (s + 1) % n;
  }
  push(point_at(curve, to));
  return out;
}

}  // namespace

std::pair<Polyline, Polyline> split_closed_curve(const Polyline& curve,
                                                 const CurvePos& a,
                                                 const CurvePos& b) {
  if (!curve.closed) throw DataError("split requires a closed curve");
  if ((point_at(curve, a) - point_at(curve, b)).norm() < 1e-12)
    throw DataError("identical split positions");
  Polyline first = forward_walk(curve, a, b);
  Polyline second = forward_walk(curve, b, a);
  std::reverse(second.points.begin(), second.points.end());
  return {std::move(first), std::move(second)};
}

double polyline_length(const Polyline& curve) {
  double len = 0.0;
  for (Eigen::Index s = 0; s < curve.num_segments(); ++s)
    len += (curve.segment_end(s) - curve.segment_start(s)).norm();
  return len;
}

namespace {

// Orthonormal in-plane basis.
void plane_basis(const Plane& plane, Vec3& u, Vec3& v) {
  int k = 0;
  plane.normal.cwiseAbs().minCoeff(&k);
  u = plane.normal.cross(Vec3::Unit(k)).normalized();
  v = plane.normal.cross(u);
}

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a,
              const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

double convex_hull_perimeter(const Polyline& curve, const Plane& plane) {
  if (curve.points.size() < 3)
    throw DataError("convex hull needs at least 3 points");
  Vec3 u, v;
  plane_basis(plane, u, v);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(curve.points.size());
  for (const auto& p : curve.points)
    pts.emplace_back(u.dot(p - plane.origin), v.dot(p - plane.origin));

  std::sort(pts.begin(), pts.end(),
            [](const Eigen::Vector2d& l, const Eigen::Vector2d& r) {
              return l.x() < r.x() || (l.x() == r.x() && l.y() < r.y());
            });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& l, const Eigen::Vector2d& r) {
                          return l == r;
                        }),
            pts.end());

  // Andrew's monotone chain; collinear points are dropped.
  const size_t n = pts.size();
  std::vector<Eigen::Vector2d> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 0 ? k - 1 : 0);  // last point repeats the first

  if (hull.size() < 3) throw DataError("points are colinear; no hull area");
  double perim = 0.0;
  for (size_t i = 0; i < hull.size(); ++i)
    perim += (hull[(i + 1) % hull.size()] - hull[i]).norm();
  return perim;
}

bool curve_encloses_point(const Polyline& curve, const Plane& plane,
                          const Vec3& p) {
  Vec3 u, v;
  plane_basis(plane, u, v);
  const double px = u.dot(p - plane.origin);
  const double py = v.dot(p - plane.origin);
  bool inside = false;
  for (Eigen::Index s = 0; s < curve.num_segments(); ++s) {
    const Vec3& a3 = curve.segment_start(s);
    const Vec3& b3 = curve.segment_end(s);
    const double x1 = u.dot(a3 - plane.origin), y1 = v.dot(a3 - plane.origin);
    const double x2 = u.dot(b3 - plane.origin), y2 = v.dot(b3 - plane.origin);
    if ((y1 > py) != (y2 > py)) {
      const double xi = x1 + (py - y1) * (x2 - x1) / (y2 - y1);
      if (xi > px) inside = !inside;
    }
  }
  return inside;
}

}  // namespace anthro

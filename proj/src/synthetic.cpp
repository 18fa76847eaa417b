#include "anthro/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "anthro/rng.hpp"

namespace anthro {

namespace {

constexpr double kPi = std::numbers::pi;
// Half-angle of the flat lateral facets that carry the arm collars.
constexpr double kFacetHalfAngle = kPi / 8.0;
// Shoulder-top height as a fraction of stature.
constexpr double kShoulderTopFrac = 0.84;

// Cross-section sample angles: single flat facets across the +x and -x
// sectors, uniform fill on the front and back arcs. Vertices are ordered
// counterclockwise starting at the left facet's front corner, and none of
// them lands on z = 0, which keeps midline slices off the grid vertices.
std::vector<double> section_angles(int n) {
  const double w = kFacetHalfAngle;
  const int m = (n - 4) / 2;
  const double step = (kPi - 2.0 * w) / (m + 1);
  std::vector<double> angles;
  angles.reserve(n);
  for (int j = 0; j <= m; ++j) angles.push_back(w + j * step);          // front
  angles.push_back(kPi - w);
  angles.push_back(kPi + w);
  for (int j = 1; j <= m; ++j) angles.push_back(kPi + w + j * step);    // back
  angles.push_back(2.0 * kPi - w);
  return angles;
}

double polygon_perimeter(double ax, double az, const std::vector<double>& th) {
  double perim = 0.0;
  const size_t n = th.size();
  for (size_t k = 0; k < n; ++k) {
    const double a0 = th[k], a1 = th[(k + 1) % n];
    const double dx = ax * (std::cos(a1) - std::cos(a0));
    const double dz = az * (std::sin(a1) - std::sin(a0));
    perim += std::hypot(dx, dz);
  }
  return perim;
}

struct Derived {
  std::vector<double> angles;
  double scale = 1.0;  // stature / 1.75, scales the construction margins
  // trunk heights, bottom to top
  double y_crotch, y_pelvis_top, y_waist_lo, y_waist_hi, y_chest_lo,
      y_shoulder_top;
  double y_neck_top, y_head_top;
  // per-band half extents
  double ax_chest, az_chest, ax_waist, az_waist, ax_pelvis, az_pelvis;
  double ax_neck, az_neck, ax_head, az_head;
  double x_panel, z_panel;  // lateral facet plane |x| and half depth
  double sin_max;           // max |sin| over the angle grid
  double z_max;             // front-most vertex z (chest band)
  double kappa;             // shoulder slice slope (yT1 - 0.65 H) / z_max
  // arms
  double alpha;             // abduction, radians below horizontal
  double collar_half;       // collar half height in the panel plane
  double y_collar;
  double arm_len[2];        // [right, left]
  double t_elbow[2], t_wrist[2];
  // joints
  double y_shoulder_joint, y_pelvis_joint, y_waist_joint, y_chest_joint;
  double leg_top;
};

[[noreturn]] void reject(const std::string& why) {
  throw DataError("invalid body parameters: " + why);
}

Derived derive(const BodyParams& p) {
  if (p.facets < 16 || p.facets % 2 != 0)
    reject("facet count must be even and >= 16");
  for (double v : {p.stature, p.crotch_height, p.shoulder_half_span,
                   p.arm_radius, p.arm_length, p.leg_radius, p.leg_offset,
                   p.torso_width, p.torso_depth, p.neck_radius,
                   p.head_half_width, p.head_half_depth})
    if (!(v > 0.0)) reject("all lengths must be positive");

  Derived d;
  d.angles = section_angles(p.facets);
  d.scale = p.stature / 1.75;
  const double H = p.stature;
  const double C = p.crotch_height;
  if (!(C > 0.25 * H && C < 0.6 * H)) reject("crotch height outside [0.25, 0.6] of stature");

  d.y_crotch = C;
  d.y_shoulder_top = kShoulderTopFrac * H;
  const double T = d.y_shoulder_top - C;
  if (!(T > 0.2 * H)) reject("trunk too short");
  d.y_pelvis_top = C + 0.20 * T;
  d.y_waist_lo = C + 0.32 * T;
  d.y_waist_hi = C + 0.48 * T;
  d.y_chest_lo = C + 0.60 * T;
  d.y_pelvis_joint = C + 0.10 * T;
  d.y_waist_joint = C + 0.40 * T;
  d.y_chest_joint = C + 0.70 * T;

  d.ax_chest = 0.5 * p.torso_width;
  d.az_chest = 0.5 * p.torso_depth;
  d.ax_waist = p.waist_width_ratio * d.ax_chest;
  d.az_waist = p.waist_depth_ratio * d.az_chest;
  d.ax_pelvis = p.pelvis_width_ratio * d.ax_chest;
  d.az_pelvis = p.pelvis_depth_ratio * d.az_chest;
  d.ax_neck = d.az_neck = p.neck_radius;
  d.ax_head = p.head_half_width;
  d.az_head = p.head_half_depth;

  const double cw = std::cos(kFacetHalfAngle), sw = std::sin(kFacetHalfAngle);
  d.x_panel = d.ax_chest * cw;
  d.z_panel = d.az_chest * sw;
  d.sin_max = 0.0;
  for (double a : d.angles) d.sin_max = std::max(d.sin_max, std::sin(a));
  d.z_max = d.az_chest * d.sin_max;

  // the chest band must be the deepest feature so the shoulder plane's
  // "thickest point" lands on it
  if (!(d.az_waist < d.az_chest - 1e-6 && d.az_pelvis < d.az_chest - 1e-6 &&
        d.az_head < d.az_chest - 0.002 * d.scale &&
        d.az_neck < d.az_chest - 0.002 * d.scale))
    reject("chest band must be strictly deepest");

  d.kappa = (d.y_shoulder_top - 0.65 * H) / d.z_max;
  if (!(d.kappa > 0.0)) reject("shoulder top below the 65% plane height");

  // neck tall enough that the tilted shoulder slice stays on it
  const double neck_h = d.kappa * d.az_neck * d.sin_max + 0.015 * d.scale;
  d.y_neck_top = d.y_shoulder_top + neck_h;
  d.y_head_top = H;
  if (!(d.y_head_top - d.y_neck_top >= 0.05 * H)) reject("no room for the head");
  if (!(d.ax_head > d.ax_neck + 0.002 * d.scale &&
        d.az_head > d.az_neck + 0.002 * d.scale))
    reject("head must be wider than the neck");

  const double s = p.shoulder_half_span;
  if (!(s > d.ax_neck * cw + 0.002 * d.scale &&
        s < d.x_panel - 0.003 * d.scale))
    reject("shoulder span must fall between neck and chest footprints");

  d.alpha = p.abduction_deg * kPi / 180.0;
  if (!(d.alpha > kPi / 9.0 && d.alpha < kPi / 3.0))
    reject("abduction angle outside (20, 60) degrees");
  if (!(p.arm_radius <= 0.8 * d.z_panel))
    reject("arm radius too large for the lateral facet");
  d.collar_half = p.arm_radius / std::cos(d.alpha);
  d.y_collar = d.y_shoulder_top - d.collar_half - 0.012 * d.scale;
  if (!(d.y_collar - d.collar_half > d.y_chest_lo + 0.005 * d.scale))
    reject("arm collar does not fit the chest band");
  if (!(d.y_chest_joint < d.y_collar - d.collar_half - 0.010 * d.scale))
    reject("chest level too close to the arm collar");

  d.arm_len[0] = p.arm_length + 0.5 * p.arm_length_delta;  // right
  d.arm_len[1] = p.arm_length - 0.5 * p.arm_length_delta;  // left
  const double tana = std::tan(d.alpha);
  for (int i = 0; i < 2; ++i) {
    if (!(d.arm_len[i] > 6.0 * p.arm_radius)) reject("arm too short");
    d.t_wrist[i] = d.arm_len[i] - 0.7 * p.arm_radius / tana;
    d.t_elbow[i] = 0.5 * d.arm_len[i];
    const double tip_y = d.y_collar - d.arm_len[i] * std::sin(d.alpha) -
                         2.0 * p.arm_radius;
    if (!(tip_y > 0.05 * H)) reject("arm reaches the ground");
  }

  d.y_shoulder_joint = d.y_shoulder_top - 0.05 * d.scale;
  if (!(d.y_shoulder_joint > d.y_chest_lo)) reject("shoulder joint below chest band");

  // legs: clear of each other, inside the pelvis footprint, clear of arms
  if (!(p.leg_offset - p.leg_radius >= 0.005 * d.scale))
    reject("legs intersect at the midline");
  for (double a : d.angles) {
    const double lx = p.leg_offset + p.leg_radius * std::cos(a);
    const double lz = p.leg_radius * std::sin(a);
    const double q = (lx / (0.97 * d.ax_pelvis)) * (lx / (0.97 * d.ax_pelvis)) +
                     (lz / (0.97 * d.az_pelvis)) * (lz / (0.97 * d.az_pelvis));
    if (q > 1.0) reject("legs poke out of the pelvis footprint");
  }
  if (!(d.x_panel >= p.leg_offset + p.leg_radius + 0.005 * d.scale))
    reject("arms overlap the legs");
  d.leg_top = C + 0.025 * d.scale;
  if (!(d.leg_top < d.y_pelvis_top)) reject("leg tops above the pelvis band");

  return d;
}

// ---------------------------------------------------------------------------
// mesh assembly

struct Builder {
  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> faces;

  int add(const Vec3& v) {
    verts.push_back(v);
    return static_cast<int>(verts.size()) - 1;
  }
  void tri(int a, int b, int c) { faces.push_back({a, b, c}); }
  // split as (a,b,c) + (a,c,d)
  void quad(int a, int b, int c, int d) {
    tri(a, b, c);
    tri(a, c, d);
  }

  std::vector<int> ring(double ax, double az, double y, double cx,
                        const std::vector<double>& angles) {
    std::vector<int> ids;
    ids.reserve(angles.size());
    for (double a : angles)
      ids.push_back(add(Vec3(cx + ax * std::cos(a), y, az * std::sin(a))));
    return ids;
  }

  // side wall between two aligned rings, lower to upper; outward normals
  void band(const std::vector<int>& lo, const std::vector<int>& up,
            int skip_a = -1, int skip_b = -1) {
    const int n = static_cast<int>(lo.size());
    for (int k = 0; k < n; ++k) {
      if (k == skip_a || k == skip_b) continue;
      const int k1 = (k + 1) % n;
      quad(lo[k1], lo[k], up[k], up[k1]);
    }
  }

  void cap_fan(const std::vector<int>& ring_ids, const Vec3& center, bool up) {
    const int c = add(center);
    const int n = static_cast<int>(ring_ids.size());
    for (int k = 0; k < n; ++k) {
      const int k1 = (k + 1) % n;
      if (up)
        tri(c, ring_ids[k1], ring_ids[k]);
      else
        tri(c, ring_ids[k], ring_ids[k1]);
    }
  }

  void annulus(const std::vector<int>& outer, const std::vector<int>& inner,
               bool up) {
    const int n = static_cast<int>(outer.size());
    for (int k = 0; k < n; ++k) {
      const int k1 = (k + 1) % n;
      if (up)
        quad(outer[k1], outer[k], inner[k], inner[k1]);
      else
        quad(outer[k], outer[k1], inner[k1], inner[k]);
    }
  }

  TriMesh finish() const {
    TriMesh m;
    m.V.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (size_t i = 0; i < verts.size(); ++i) m.V.row(i) = verts[i];
    m.F.resize(static_cast<Eigen::Index>(faces.size()), 3);
    for (size_t i = 0; i < faces.size(); ++i) m.F.row(i) = faces[i];
    return m;
  }
};

// Watertightness audit: every edge used by exactly two faces, in opposite
// directions, and positive enclosed volume (outward orientation).
void audit_surface(const TriMesh& m) {
  std::map<std::pair<int, int>, int> open_edges;
  for (Eigen::Index f = 0; f < m.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = m.F(f, k), b = m.F(f, (k + 1) % 3);
      auto it = open_edges.find({b, a});
      if (it != open_edges.end() && it->second > 0) {
        --it->second;
      } else {
        ++open_edges[{a, b}];
      }
    }
  }
  for (const auto& [e, count] : open_edges)
    if (count != 0) {
      std::ostringstream os;
      os << "generator bug: unmatched edge " << e.first << "-" << e.second;
      throw Error(os.str());
    }
  double vol6 = 0.0;
  for (Eigen::Index f = 0; f < m.num_faces(); ++f) {
    Vec3 a, b, c;
    m.corners(f, a, b, c);
    vol6 += a.dot(b.cross(c));
  }
  if (vol6 <= 0.0) throw Error("generator bug: inward orientation");
}

}  // namespace

BodyParams BodyParams::scaled(double s) const {
  BodyParams out = *this;
  out.stature *= s;
  out.crotch_height *= s;
  out.shoulder_half_span *= s;
  out.arm_radius *= s;
  out.arm_length *= s;
  out.arm_length_delta *= s;
  out.leg_radius *= s;
  out.leg_offset *= s;
  out.torso_width *= s;
  out.torso_depth *= s;
  out.neck_radius *= s;
  out.head_half_width *= s;
  out.head_half_depth *= s;
  return out;
}

SynthBody generate_body(const BodyParams& p, uint64_t /*seed*/) {
  const Derived d = derive(p);
  const auto& th = d.angles;
  const int n = p.facets;
  const int m = (n - 4) / 2;
  const int seg_right = m + 1;  // facet segment between pi-w and pi+w
  const int seg_left = n - 1;   // wrap segment between 2pi-w and w

  Builder bd;

  // trunk rings, bottom to top
  const auto r_crotch = bd.ring(d.ax_pelvis, d.az_pelvis, d.y_crotch, 0, th);
  const auto r_pelvis = bd.ring(d.ax_pelvis, d.az_pelvis, d.y_pelvis_top, 0, th);
  const auto r_waist_lo = bd.ring(d.ax_waist, d.az_waist, d.y_waist_lo, 0, th);
  const auto r_waist_hi = bd.ring(d.ax_waist, d.az_waist, d.y_waist_hi, 0, th);
  const auto r_chest_lo = bd.ring(d.ax_chest, d.az_chest, d.y_chest_lo, 0, th);
  const auto r_chest_hi = bd.ring(d.ax_chest, d.az_chest, d.y_shoulder_top, 0, th);

  bd.cap_fan(r_crotch, Vec3(0, d.y_crotch, 0), /*up=*/false);
  bd.band(r_crotch, r_pelvis);
  bd.band(r_pelvis, r_waist_lo);
  bd.band(r_waist_lo, r_waist_hi);
  bd.band(r_waist_hi, r_chest_lo);
  bd.band(r_chest_lo, r_chest_hi, seg_right, seg_left);  // facets get panels

  // neck + head
  const auto r_neck_lo = bd.ring(d.ax_neck, d.az_neck, d.y_shoulder_top, 0, th);
  const auto r_neck_hi = bd.ring(d.ax_neck, d.az_neck, d.y_neck_top, 0, th);
  const auto r_head_lo = bd.ring(d.ax_head, d.az_head, d.y_neck_top, 0, th);
  const auto r_head_hi = bd.ring(d.ax_head, d.az_head, d.y_head_top, 0, th);
  bd.annulus(r_chest_hi, r_neck_lo, /*up=*/true);  // shoulder cap
  bd.band(r_neck_lo, r_neck_hi);
  bd.annulus(r_head_lo, r_neck_hi, /*up=*/false);  // head underside
  bd.band(r_head_lo, r_head_hi);
  bd.cap_fan(r_head_hi, Vec3(0, d.y_head_top, 0), /*up=*/true);

  // arms: panel-with-hole on each lateral facet plus the sheared prism
  const double ca = std::cos(d.alpha), sa = std::sin(d.alpha);
  const double ra = p.arm_radius, h = d.collar_half;
  for (int side = 0; side < 2; ++side) {        // 0 = right (-x), 1 = left
    const double sg = side == 0 ? -1.0 : 1.0;
    const double L = d.arm_len[side];
    const Vec3 axis_dir(sg * ca, -sa, 0.0);
    const Vec3 up(sg * sa, ca, 0.0);            // cap-plane vertical
    const Vec3 attach(sg * d.x_panel, d.y_collar, 0.0);
    const Vec3 end = attach + L * axis_dir;

    // outer facet corners, wound so the panel faces outward
    std::vector<int> outer;
    if (side == 0)
      outer = {r_chest_lo[seg_right], r_chest_hi[seg_right],
               r_chest_hi[seg_right + 1], r_chest_lo[seg_right + 1]};
    else
      outer = {r_chest_lo[seg_left], r_chest_hi[seg_left], r_chest_hi[0],
               r_chest_lo[0]};

    // corner signatures (vertical, depth), aligned outer vs collar vs end
    const double sig[4][2] = {{-1, -sg}, {1, -sg}, {1, sg}, {-1, sg}};
    std::vector<int> collar, endcap;
    for (auto& s2 : sig) {
      collar.push_back(bd.add(attach + Vec3(0, s2[0] * h, s2[1] * ra)));
      endcap.push_back(bd.add(end + s2[0] * ra * up + Vec3(0, 0, s2[1] * ra)));
    }
    for (int k = 0; k < 4; ++k) {  // panel annulus, 8 triangles
      const int k1 = (k + 1) % 4;
      bd.quad(outer[k], outer[k1], collar[k1], collar[k]);
    }
    for (int k = 0; k < 4; ++k) {  // prism walls
      const int k1 = (k + 1) % 4;
      bd.quad(collar[k], collar[k1], endcap[k1], endcap[k]);
    }
    bd.quad(endcap[0], endcap[1], endcap[2], endcap[3]);
  }

  // legs: free-standing prisms from the floor up into the pelvis band
  for (double sg : {-1.0, 1.0}) {
    const double cx = sg * p.leg_offset;
    const auto r_lo = bd.ring(p.leg_radius, p.leg_radius, 0.0, cx, th);
    const auto r_hi = bd.ring(p.leg_radius, p.leg_radius, d.leg_top, cx, th);
    bd.cap_fan(r_lo, Vec3(cx, 0, 0), /*up=*/false);
    bd.band(r_lo, r_hi);
    bd.cap_fan(r_hi, Vec3(cx, d.leg_top, 0), /*up=*/true);
  }

  SynthBody body;
  body.mesh = bd.finish();
  validate_mesh(body.mesh);
  audit_surface(body.mesh);

  // joints
  const double s = p.shoulder_half_span;
  body.joints.set("right_shoulder", Vec3(-s, d.y_shoulder_joint, 0));
  body.joints.set("left_shoulder", Vec3(s, d.y_shoulder_joint, 0));
  for (int side = 0; side < 2; ++side) {
    const double sg = side == 0 ? -1.0 : 1.0;
    const Vec3 axis_dir(sg * std::cos(d.alpha), -std::sin(d.alpha), 0.0);
    const Vec3 attach(sg * d.x_panel, d.y_collar, 0.0);
    const char* elbow = side == 0 ? "right_elbow" : "left_elbow";
    const char* wrist = side == 0 ? "right_wrist" : "left_wrist";
    body.joints.set(elbow, attach + d.t_elbow[side] * axis_dir);
    body.joints.set(wrist, attach + d.t_wrist[side] * axis_dir);
  }
  body.joints.set("pelvis", Vec3(0, d.y_pelvis_joint, 0));
  body.joints.set("waist", Vec3(0, d.y_waist_joint, 0));
  body.joints.set("chest", Vec3(0, d.y_chest_joint, 0));

  // closed-form ground truth
  const double cw = std::cos(kFacetHalfAngle);
  HbdVector v, tol;

  // shoulder width: two cap segments plus the chained neck-back crossing
  // points of the tilted plane y = yT1 - kappa * z
  {
    double arc = 0.0;
    std::vector<Vec3> pts;
    for (int k = m + 2; k < n; ++k) {  // back vertices, pi+w .. 2pi-w
      const double a = th[k];
      pts.emplace_back(d.ax_neck * std::cos(a),
                       d.y_shoulder_top - d.kappa * d.az_neck * std::sin(a),
                       d.az_neck * std::sin(a));
    }
    Vec3 q0(-d.ax_neck * cw, d.y_shoulder_top, 0);
    Vec3 q1(d.ax_neck * cw, d.y_shoulder_top, 0);
    arc += (pts.front() - q0).norm();
    for (size_t i = 0; i + 1 < pts.size(); ++i)
      arc += (pts[i + 1] - pts[i]).norm();
    arc += (q1 - pts.back()).norm();
    v[int(Dim::kShoulderWidth)] = 2.0 * (s - d.ax_neck * cw) + arc;
  }

  // arm skin path: cap run, chest facet drop, prism top edge, end-cap run
  for (int side = 0; side < 2; ++side) {
    const double sg = side == 0 ? -1.0 : 1.0;
    const double L = d.arm_len[side];
    const Vec3 axis_dir(sg * ca, -sa, 0.0);
    const Vec3 up(sg * sa, ca, 0.0);
    const Vec3 attach(sg * d.x_panel, d.y_collar, 0.0);
    const Vec3 cap_top = attach + L * axis_dir + ra * up;
    const Vec3 collar_top(sg * d.x_panel, d.y_collar + h, 0.0);
    const double path = (d.x_panel - s) +
                        (d.y_shoulder_top - (d.y_collar + h)) +
                        (cap_top - collar_top).norm() +
                        (ra - (L - d.t_wrist[side]) * std::tan(d.alpha));
    v[side == 0 ? int(Dim::kRightArmLength) : int(Dim::kLeftArmLength)] = path;
  }

  v[int(Dim::kInseam)] = p.crotch_height;
  v[int(Dim::kChestCircumference)] =
      polygon_perimeter(d.ax_chest, d.az_chest, th);
  v[int(Dim::kWaistCircumference)] =
      polygon_perimeter(d.ax_waist, d.az_waist, th);
  v[int(Dim::kPelvisCircumference)] =
      polygon_perimeter(d.ax_pelvis, d.az_pelvis, th);
  v[int(Dim::kHeight)] = p.stature;

  tol[int(Dim::kShoulderWidth)] = 0.01 * v[int(Dim::kShoulderWidth)];
  tol[int(Dim::kRightArmLength)] = 0.01 * v[int(Dim::kRightArmLength)];
  tol[int(Dim::kLeftArmLength)] = 0.01 * v[int(Dim::kLeftArmLength)];
  tol[int(Dim::kInseam)] = 1e-6;
  tol[int(Dim::kChestCircumference)] = 1e-9;
  tol[int(Dim::kWaistCircumference)] = 1e-9;
  tol[int(Dim::kPelvisCircumference)] = 1e-9;
  tol[int(Dim::kHeight)] = 1e-6;

  validate_hbd(v);
  body.truth = GroundTruth{v, tol};
  return body;
}

namespace {

double urange(std::mt19937_64& rng, const double r[2]) {
  return uniform_range(rng, r[0], r[1]);
}

}  // namespace

std::vector<GeneratedSubject> generate_population(int n, uint64_t seed,
                                                  const ParamRanges& ranges) {
  if (n <= 0) throw DataError("population size must be positive");
  std::mt19937_64 rng(seed);
  std::vector<GeneratedSubject> out;
  out.reserve(2 * static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Gender gender = (i % 2 == 0) ? Gender::kFemale : Gender::kMale;
    const bool female = gender == Gender::kFemale;

    BodyParams base;
    base.facets = ranges.facets;
    base.stature =
        urange(rng, female ? ranges.stature_female : ranges.stature_male);
    const double H = base.stature;
    base.crotch_height = H * urange(rng, ranges.crotch_frac);
    base.torso_width = H * urange(rng, ranges.torso_width_frac);
    base.torso_depth = H * urange(rng, ranges.torso_depth_frac);
    base.shoulder_half_span = H * urange(rng, female ? ranges.span_frac_female
                                                     : ranges.span_frac_male);
    base.arm_radius = H * urange(rng, ranges.arm_radius_frac);
    base.arm_length = H * urange(rng, ranges.arm_length_frac);
    base.arm_length_delta = H * urange(rng, ranges.arm_delta_frac);
    base.leg_radius = H * urange(rng, ranges.leg_radius_frac);
    base.leg_offset = H * urange(rng, ranges.leg_offset_frac);
    base.waist_width_ratio = urange(rng, ranges.waist_width_ratio);
    base.waist_depth_ratio = urange(rng, ranges.waist_depth_ratio);
    base.pelvis_width_ratio =
        urange(rng, female ? ranges.pelvis_width_ratio_female
                           : ranges.pelvis_width_ratio_male);
    base.pelvis_depth_ratio = urange(rng, ranges.pelvis_depth_ratio);
    base.neck_radius = H * urange(rng, ranges.neck_radius_frac);
    base.head_half_width = H * urange(rng, ranges.head_half_width_frac);
    base.head_half_depth = H * urange(rng, ranges.head_half_depth_frac);

    char id[32];
    std::snprintf(id, sizeof(id), "subj%04d", i);

    for (PoseTag pose : {PoseTag::kPose0, PoseTag::kPose1}) {
      BodyParams p = base;
      p.pose = pose;
      p.abduction_deg = pose == PoseTag::kPose0 ? ranges.pose0_abduction_deg
                                                : ranges.pose1_abduction_deg;
      GeneratedSubject subj;
      subj.subject_id = id;
      subj.gender = gender;
      subj.pose = pose;
      subj.params = p;
      subj.body = generate_body(p, seed);
      out.push_back(std::move(subj));
    }
  }
  return out;
}

}  // namespace anthro

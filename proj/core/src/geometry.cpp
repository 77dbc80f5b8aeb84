#include "omnisweep/geometry.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace omnisweep {

bool RigidPose::is_orthonormal(double tol) const {
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidPose compose_pose(const RigidPose& a, const RigidPose& b) {
  RigidPose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

RigidPose invert_pose(const RigidPose& p) {
  RigidPose out;
  out.rotation = p.rotation.transpose();
  out.translation = -(p.rotation.transpose() * p.translation);
  return out;
}

FisheyeCamera::FovLimits FisheyeCamera::fov_limits() const {
  const double sv = std::sin(deg_to_rad(vfov_deg) / 2);
  return {std::cos(deg_to_rad(hfov_deg) / 2), sv * sv};
}

double FisheyeCamera::monotone_theta_limit() const {
  // Scan for the first stationary point of rho(theta); refine by bisection.
  constexpr int kSteps = 2048;
  const double h = kPi / kSteps;
  for (int i = 1; i <= kSteps; ++i) {
    const double t = i * h;
    if (radial_deriv(t) <= 0) {
      double lo = t - h, hi = t;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (radial_deriv(mid) > 0 ? lo : hi) = mid;
      }
      return lo;
    }
  }
  return kPi;
}

void FisheyeCamera::validate(const std::string& label) const {
  std::ostringstream err;
  auto fail = [&err, &label](const std::string& msg) { err << label << ": " << msg << "\n"; };
  if (width <= 0 || height <= 0) fail("width/height must be positive");
  if (fx <= 0 || fy <= 0) fail("fx/fy must be positive");
  if (!(hfov_deg > 0 && hfov_deg <= 180)) fail("hfov_deg must be in (0, 180]");
  if (!(vfov_deg > 0 && vfov_deg <= 180)) fail("vfov_deg must be in (0, 180]");
  if (!pose.is_orthonormal()) fail("pose.rotation is not orthonormal (or det != +1) within 1e-9");
  const double need = deg_to_rad(std::max(hfov_deg, vfov_deg)) / 2;
  if (monotone_theta_limit() < need)
    fail("radial polynomial is not monotone over the valid theta range");
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument(msg);
}

ProjectResult project(const FisheyeCamera& cam, const Vec3& p,
                      const FisheyeCamera::FovLimits& lim) {
  if (!p.allFinite()) throw std::invalid_argument("project: point must be finite");
  const double rxy2 = p.x() * p.x() + p.y() * p.y();
  if (rxy2 == 0.0 && p.z() == 0.0)
    throw std::invalid_argument("project: point must be nonzero");

  const double rxy = std::sqrt(rxy2);
  const double theta = std::atan2(rxy, p.z());
  const double rho = cam.radial(theta);
  // cos(phi) = x/rxy, sin(phi) = y/rxy; at the optical axis phi is undefined
  // and rho is 0, so any value works -- use 0 to land on the principal point.
  const double cp = rxy > 0 ? p.x() / rxy : 0.0;
  const double sp = rxy > 0 ? p.y() / rxy : 0.0;

  ProjectResult res;
  res.pixel = Vec2(cam.cx + cam.fx * rho * cp, cam.cy + cam.fy * rho * sp);
  res.valid = cam.in_fov(p, lim) && res.pixel.x() >= 0 && res.pixel.x() < cam.width &&
              res.pixel.y() >= 0 && res.pixel.y() < cam.height;
  return res;
}

ProjectResult project(const FisheyeCamera& cam, const Vec3& p) {
  return project(cam, p, cam.fov_limits());
}

Vec3 unproject(const FisheyeCamera& cam, const Vec2& pixel) {
  if (pixel.x() < 0 || pixel.x() >= cam.width || pixel.y() < 0 || pixel.y() >= cam.height)
    throw std::invalid_argument("unproject: pixel out of bounds");

  const double dx = (pixel.x() - cam.cx) / cam.fx;
  const double dy = (pixel.y() - cam.cy) / cam.fy;
  const double rho = std::hypot(dx, dy);
  if (rho == 0.0) return Vec3(0, 0, 1);
  const double phi = std::atan2(dy, dx);

  // Solve rho(theta) = rho on [0, theta_limit]; rho is strictly increasing
  // there, so bisection always converges and Newton accelerates it.
  const double hi0 = cam.monotone_theta_limit();
  double lo = 0.0, hi = hi0;
  double theta = rho < cam.radial(hi0) ? std::min(rho, hi0) : hi0;  // k=0 guess
  for (int it = 0; it < 200; ++it) {
    const double f = cam.radial(theta) - rho;
    const double df = cam.radial_deriv(theta);
    if (f > 0)
      hi = theta;
    else
      lo = theta;
    double next = theta - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - theta);
    theta = next;
    if (step < 1e-10 || hi - lo < 1e-10) break;
  }

  const double st = std::sin(theta);
  return Vec3(st * std::cos(phi), st * std::sin(phi), std::cos(theta));
}

int RigConfig::group_of_camera(int cam_index) const {
  for (int g = 0; g < 2; ++g)
    for (int c : groups[g])
      if (c == cam_index) return g;
  return -1;
}

void RigConfig::validate() const {
  std::ostringstream err;
  if (cameras.size() != 6) err << "cameras: expected exactly 6, got " << cameras.size() << "\n";
  if (!(min_depth > 0 && min_depth < max_depth))
    err << "min_depth/max_depth: need 0 < min_depth < max_depth\n";
  if (num_hypotheses < 2) err << "num_hypotheses: must be >= 2\n";
  if (sphere_width < 4 || sphere_height < 2) err << "sphere_width/height: degenerate\n";
  if (!(0 <= crop_rows.first && crop_rows.first < crop_rows.second &&
        crop_rows.second <= sphere_height))
    err << "crop_rows: need 0 <= first < last <= sphere_height\n";

  std::array<bool, 6> seen{};
  bool groups_ok = true;
  for (const auto& g : groups)
    for (int c : g) {
      if (c < 0 || c > 5 || seen[c]) groups_ok = false;
      else seen[c] = true;
    }
  // The two triples must be the even and odd cameras.
  if (groups_ok)
    for (int g = 0; g < 2; ++g)
      for (int c : groups[g])
        if (c % 2 != g) groups_ok = false;
  if (!groups_ok) err << "groups: must partition {0..5} into {0,2,4} and {1,3,5}\n";

  std::string msg = err.str();
  for (size_t i = 0; i < cameras.size(); ++i) {
    try {
      cameras[i].validate("cameras[" + std::to_string(i) + "]");
    } catch (const std::invalid_argument& e) {
      msg += e.what();
    }
  }
  if (!msg.empty()) throw std::invalid_argument("rig config invalid:\n" + msg);
}

namespace {

// Largest |rho(theta)*cos(phi)| and |rho(theta)*sin(phi)| over the rectangular
// az/el field of view; determines the focal scale that keeps every valid ray
// inside the image.
void fov_image_extent(const FisheyeCamera& cam, double& max_u, double& max_v) {
  const double ha = deg_to_rad(cam.hfov_deg) / 2;
  const double va = deg_to_rad(cam.vfov_deg) / 2;
  max_u = 0;
  max_v = 0;
  constexpr int kSamples = 720;
  // The extrema lie on the FoV boundary: sweep both edges.
  for (int i = 0; i <= kSamples; ++i) {
    const double s = double(i) / kSamples;
    // edge 1: azimuth = +-ha, elevation in [-va, va]
    // edge 2: elevation = +-va, azimuth in [-ha, ha]
    for (int edge = 0; edge < 2; ++edge) {
      const double az = edge == 0 ? ha : s * ha;
      const double el = edge == 0 ? s * va : va;
      const Vec3 d(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
      const double theta = std::atan2(std::hypot(d.x(), d.y()), d.z());
      const double phi = std::atan2(d.y(), d.x());
      const double rho = cam.radial(theta);
      max_u = std::max(max_u, std::abs(rho * std::cos(phi)));
      max_v = std::max(max_v, std::abs(rho * std::sin(phi)));
    }
  }
}

}  // namespace

RigConfig default_hexagon_rig(double radius_m, double yaw_step_deg, int image_width,
                              int image_height, double hfov_deg, double vfov_deg) {
  if (radius_m <= 0) throw std::invalid_argument("default_hexagon_rig: radius must be positive");

  FisheyeCamera proto;
  proto.width = image_width;
  proto.height = image_height;
  proto.cx = (image_width - 1) / 2.0;
  proto.cy = (image_height - 1) / 2.0;
  proto.hfov_deg = hfov_deg;
  proto.vfov_deg = vfov_deg;
  proto.fx = proto.fy = 1.0;  // placeholder for extent computation
  double max_u = 0, max_v = 0;
  fov_image_extent(proto, max_u, max_v);
  const double margin = 4.0;
  proto.fx = (image_width / 2.0 - margin) / max_u;
  proto.fy = (image_height / 2.0 - margin) / max_v;

  RigConfig rig;
  rig.cameras.reserve(6);
  for (int i = 0; i < 6; ++i) {
    FisheyeCamera cam = proto;
    const double pos_az = deg_to_rad(60.0 * i);
    const double yaw = deg_to_rad(yaw_step_deg * i);
    // Outward camera at azimuth yaw: +z = (cos yaw, sin yaw, 0),
    // +y = rig down = (0,0,-1), +x = y cross z.
    Mat3 r;
    r.col(0) = Vec3(std::sin(yaw), -std::cos(yaw), 0);
    r.col(1) = Vec3(0, 0, -1);
    r.col(2) = Vec3(std::cos(yaw), std::sin(yaw), 0);
    cam.pose.rotation = r;
    cam.pose.translation = radius_m * Vec3(std::cos(pos_az), std::sin(pos_az), 0);
    rig.cameras.push_back(cam);
  }
  rig.validate();
  return rig;
}

namespace {

inline void fnv_bytes(uint64_t& h, const void* p, size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  for (size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ull;
  }
}
inline void fnv_f64(uint64_t& h, double v) { fnv_bytes(h, &v, sizeof v); }
inline void fnv_i32(uint64_t& h, int32_t v) { fnv_bytes(h, &v, sizeof v); }

}  // namespace

uint64_t rig_hash(const RigConfig& rig) {
  uint64_t h = 0xcbf29ce484222325ull;
  fnv_f64(h, rig.min_depth);
  fnv_f64(h, rig.max_depth);
  fnv_i32(h, rig.num_hypotheses);
  fnv_i32(h, rig.sphere_width);
  fnv_i32(h, rig.sphere_height);
  fnv_i32(h, rig.crop_rows.first);
  fnv_i32(h, rig.crop_rows.second);
  for (const auto& g : rig.groups)
    for (int c : g) fnv_i32(h, c);
  for (const auto& cam : rig.cameras) {
    fnv_i32(h, cam.width);
    fnv_i32(h, cam.height);
    fnv_f64(h, cam.fx);
    fnv_f64(h, cam.fy);
    fnv_f64(h, cam.cx);
    fnv_f64(h, cam.cy);
    for (double kk : cam.k) fnv_f64(h, kk);
    fnv_f64(h, cam.hfov_deg);
    fnv_f64(h, cam.vfov_deg);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) fnv_f64(h, cam.pose.rotation(r, c));
    for (int r = 0; r < 3; ++r) fnv_f64(h, cam.pose.translation(r));
  }
  return h;
}

}  // namespace omnisweep

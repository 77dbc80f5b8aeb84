#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace omnisweep {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

// Rigid transform mapping local coordinates into the parent frame:
// p_parent = rotation * p_local + translation.
struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_dir(const Vec3& d) const { return rotation * d; }

  // ||R^T R - I|| and |det(R) - 1| must both be below tol.
  bool is_orthonormal(double tol = 1e-9) const;
};

RigidPose compose_pose(const RigidPose& a, const RigidPose& b);
RigidPose invert_pose(const RigidPose& p);

// Equidistant fisheye with a 4-term odd radial polynomial:
//   theta = angle(point, +z),  rho(theta) = theta * (1 + k1 t^2 + k2 t^4 + k3 t^6 + k4 t^8)
//   u = cx + fx * rho * cos(phi),  v = cy + fy * rho * sin(phi)
// Camera frame: +z optical axis, +x right, +y down.
// A ray is inside the field of view iff |azimuth| <= hfov/2 and
// |elevation| <= vfov/2, where azimuth = atan2(x, z) and
// elevation = asin(y / |d|).
struct FisheyeCamera {
  int width = 0;
  int height = 0;
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  std::array<double, 4> k{0, 0, 0, 0};
  double hfov_deg = 0, vfov_deg = 0;
  RigidPose pose;  // camera-to-rig

  double radial(double theta) const {
    const double t2 = theta * theta;
    return theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))));
  }
  // d rho / d theta
  double radial_deriv(double theta) const {
    const double t2 = theta * theta;
    return 1.0 + t2 * (3 * k[0] + t2 * (5 * k[1] + t2 * (7 * k[2] + t2 * 9 * k[3])));
  }

  // Precomputed FoV trig for the hot projection path.
  struct FovLimits {
    double cos_half_h;
    double sin_half_v_sq;
  };
  FovLimits fov_limits() const;

  bool in_fov(const Vec3& dir_cam) const { return in_fov(dir_cam, fov_limits()); }
  // azimuth <= hfov/2  <=>  z >= cos(hfov/2) * sqrt(x^2 + z^2)
  // elevation <= vfov/2  <=>  y^2 <= sin^2(vfov/2) * |d|^2
  bool in_fov(const Vec3& d, const FovLimits& lim) const {
    const double n2 = d.squaredNorm();
    if (d.y() * d.y() > lim.sin_half_v_sq * n2) return false;
    return d.z() >= lim.cos_half_h * std::sqrt(d.x() * d.x() + d.z() * d.z());
  }

  // Largest theta (<= pi) up to which the radial polynomial is strictly
  // increasing. The unproject solve brackets on [0, theta_limit].
  double monotone_theta_limit() const;

  Vec3 optical_axis_rig() const { return pose.rotation.col(2); }
  Vec3 center_rig() const { return pose.translation; }

  // Throws std::invalid_argument listing every violated field.
  void validate(const std::string& label = "camera") const;
};

struct ProjectResult {
  Vec2 pixel{0, 0};
  bool valid = false;
};

// Projects a camera-frame point. valid is false when the ray leaves the
// field of view or the pixel falls outside [0,width) x [0,height) --
// see FisheyeCamera for the exact test. Zero-length input throws.
ProjectResult project(const FisheyeCamera& cam, const Vec3& point_cam);
// Hot-loop variant; `lim` must come from cam.fov_limits().
ProjectResult project(const FisheyeCamera& cam, const Vec3& point_cam,
                      const FisheyeCamera::FovLimits& lim);

// Inverts project() for an in-bounds pixel; returns a unit ray in the camera
// frame. The radial polynomial is solved by a bisection/Newton hybrid to
// |delta theta| < 1e-10. Out-of-bounds pixel throws.
Vec3 unproject(const FisheyeCamera& cam, const Vec2& pixel);

struct RigConfig {
  std::vector<FisheyeCamera> cameras;         // exactly 6
  std::array<std::array<int, 3>, 2> groups{{{0, 2, 4}, {1, 3, 5}}};
  double min_depth = 0.5;
  double max_depth = 100.0;
  int num_hypotheses = 64;
  int sphere_width = 960;
  int sphere_height = 480;
  std::pair<int, int> crop_rows{160, 320};  // [first, last)

  int group_of_camera(int cam_index) const;
  void validate() const;  // throws std::invalid_argument with field-level messages
};

// Six identical outward-facing cameras whose optical centers sit on a regular
// hexagon of the given circumradius (= side length), camera i at azimuth
// i*60 deg, yawed i*yaw_step_deg. Optical axes are horizontal. fx/fy are
// sized so the whole rectangular az/el field of view projects inside the
// image with a small margin.
RigConfig default_hexagon_rig(double radius_m = 0.17, double yaw_step_deg = 60.0,
                              int image_width = 960, int image_height = 540,
                              double hfov_deg = 161.0, double vfov_deg = 75.0);

// FNV-1a over a canonical little-endian serialization of every rig field.
// Used to key mapping-table caches and manifests.
uint64_t rig_hash(const RigConfig& rig);

}  // namespace omnisweep

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "omnisweep/geometry.hpp"
#include "omnisweep/rng.hpp"

using namespace omnisweep;

namespace {

FisheyeCamera basic_camera() {
  FisheyeCamera cam;
  cam.width = 960;
  cam.height = 540;
  cam.fx = cam.fy = 180;
  cam.cx = 480;
  cam.cy = 270;
  cam.hfov_deg = 161;
  cam.vfov_deg = 75;
  return cam;
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

RigidPose yaw_pose(double deg) {
  const double a = deg_to_rad(deg);
  RigidPose p;
  p.rotation << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("project maps the optical axis to the principal point") {
  const FisheyeCamera cam = basic_camera();
  const ProjectResult r = project(cam, Vec3(0, 0, 5));
  CHECK(r.valid);
  CHECK(r.pixel.x() == doctest::Approx(480).epsilon(1e-12));
  CHECK(r.pixel.y() == doctest::Approx(270).epsilon(1e-12));
}

TEST_CASE("project rejects rays behind the camera and zero input") {
  const FisheyeCamera cam = basic_camera();
  CHECK_FALSE(project(cam, Vec3(0, 0, -1)).valid);
  CHECK_THROWS_AS(project(cam, Vec3(0, 0, 0)), std::invalid_argument);
}

TEST_CASE("equidistant border pixel with k=0 has the closed-form angle") {
  // fx sized so r(theta) lands on the right border pixel.
  FisheyeCamera cam = basic_camera();
  const double theta = deg_to_rad(80.45);
  cam.fx = cam.fy = (cam.width - 1 - cam.cx) / theta;

  const Vec3 dir(std::sin(theta), 0, std::cos(theta));
  const ProjectResult r = project(cam, dir);
  CHECK(r.valid);
  CHECK(r.pixel.x() == doctest::Approx(cam.width - 1).epsilon(1e-9));
  CHECK(r.pixel.y() == doctest::Approx(cam.cy).epsilon(1e-9));

  // Inverse: border pixel unprojects to theta = r_border / fx.
  const Vec3 ray = unproject(cam, Vec2(cam.width - 1, cam.cy));
  CHECK(angle_between(ray, Vec3(0, 0, 1)) == doctest::Approx(theta).epsilon(1e-9));
}

TEST_CASE("unproject principal point gives the optical axis") {
  const FisheyeCamera cam = basic_camera();
  const Vec3 ray = unproject(cam, Vec2(cam.cx, cam.cy));
  CHECK(ray.isApprox(Vec3(0, 0, 1), 1e-10));
  CHECK_THROWS_AS(unproject(cam, Vec2(-1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(unproject(cam, Vec2(0, cam.height)), std::invalid_argument);
}

TEST_CASE("project/unproject round trip over random in-FoV rays") {
  const RigConfig rig = default_hexagon_rig();
  Rng rng(42);
  for (const FisheyeCamera& cam : rig.cameras) {
    int tested = 0;
    for (int i = 0; i < 10000; ++i) {
      const double az = rng.uniform(-0.995, 0.995) * deg_to_rad(cam.hfov_deg / 2);
      const double el = rng.uniform(-0.995, 0.995) * deg_to_rad(cam.vfov_deg / 2);
      const Vec3 dir(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
      const ProjectResult r = project(cam, dir);
      REQUIRE(r.valid);
      const Vec3 back = unproject(cam, r.pixel);
      REQUIRE(angle_between(dir, back) < 1e-6);
      ++tested;
    }
    CHECK(tested == 10000);
  }
}

TEST_CASE("pose composition laws") {
  Rng rng(7);
  const auto random_pose = [&rng] {
    RigidPose p = yaw_pose(rng.uniform(-180, 180));
    const RigidPose tilt = [&] {
      RigidPose q;
      const double a = rng.uniform(-0.5, 0.5);
      q.rotation << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
      return q;
    }();
    p = compose_pose(p, tilt);
    p.translation = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    return p;
  };

  const RigidPose identity;
  for (int i = 0; i < 20; ++i) {
    const RigidPose p = random_pose();
    CHECK(p.is_orthonormal());

    const RigidPose ip = compose_pose(identity, p);
    CHECK(ip.rotation.isApprox(p.rotation, 1e-15));
    CHECK(ip.translation.isApprox(p.translation, 1e-15));

    const RigidPose e = compose_pose(p, invert_pose(p));
    CHECK((e.rotation - Mat3::Identity()).norm() < 1e-9);
    CHECK(e.translation.norm() < 1e-9);

    const RigidPose a = random_pose(), b = random_pose();
    const RigidPose l = compose_pose(compose_pose(p, a), b);
    const RigidPose r = compose_pose(p, compose_pose(a, b));
    CHECK(l.rotation.isApprox(r.rotation, 1e-12));
    CHECK(l.translation.isApprox(r.translation, 1e-12));
  }
}

TEST_CASE("two 60 degree yaws compose to one 120 degree yaw") {
  const RigidPose two = compose_pose(yaw_pose(60), yaw_pose(60));
  CHECK(two.rotation.isApprox(yaw_pose(120).rotation, 1e-12));
}

TEST_CASE("is_orthonormal rejects a perturbed rotation") {
  RigidPose p;
  p.rotation(0, 1) += 1e-6;
  CHECK_FALSE(p.is_orthonormal());
}

TEST_CASE("hexagon rig geometry") {
  const RigConfig rig = default_hexagon_rig(0.17, 60);
  rig.validate();
  REQUIRE(rig.cameras.size() == 6);

  for (int i = 0; i < 6; ++i) {
    const Vec3 c0 = rig.cameras[i].center_rig();
    const Vec3 c1 = rig.cameras[(i + 1) % 6].center_rig();
    CHECK((c1 - c0).norm() == doctest::Approx(0.17).epsilon(1e-12));

    const Vec3 a0 = rig.cameras[i].optical_axis_rig();
    const Vec3 a1 = rig.cameras[(i + 1) % 6].optical_axis_rig();
    CHECK(std::abs(a0.z()) < 1e-12);  // horizontal optical axes
    CHECK(a0.dot(a1) == doctest::Approx(std::cos(deg_to_rad(60))).epsilon(1e-12));
  }
  // yaw_step 60: camera 3 faces opposite camera 0.
  CHECK(rig.cameras[3].optical_axis_rig().isApprox(-rig.cameras[0].optical_axis_rig(), 1e-12));

  CHECK(rig.groups[0] == std::array<int, 3>{0, 2, 4});
  CHECK(rig.groups[1] == std::array<int, 3>{1, 3, 5});
  CHECK(rig.group_of_camera(0) == 0);
  CHECK(rig.group_of_camera(5) == 1);
}

TEST_CASE("rig hash keys every field") {
  const RigConfig rig = default_hexagon_rig();
  CHECK(rig_hash(rig) == rig_hash(rig));

  RigConfig other = rig;
  other.min_depth = 0.6;
  CHECK(rig_hash(other) != rig_hash(rig));

  other = rig;
  other.cameras[3].fx += 1e-9;
  CHECK(rig_hash(other) != rig_hash(rig));
}

TEST_CASE("config validation reports field-level errors") {
  RigConfig rig = default_hexagon_rig();
  rig.cameras.pop_back();
  CHECK_THROWS_AS(rig.validate(), std::invalid_argument);

  rig = default_hexagon_rig();
  rig.min_depth = rig.max_depth;
  CHECK_THROWS_AS(rig.validate(), std::invalid_argument);

  rig = default_hexagon_rig();
  rig.crop_rows = {400, 300};
  CHECK_THROWS_AS(rig.validate(), std::invalid_argument);

  FisheyeCamera cam = basic_camera();
  cam.fx = 0;
  try {
    cam.validate("cam3");
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("fx") != std::string::npos);
    CHECK(std::string(e.what()).find("cam3") != std::string::npos);
  }
}

TEST_SUITE_END();

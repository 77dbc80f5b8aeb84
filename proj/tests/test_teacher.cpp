#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "omnisweep/eval.hpp"
#include "omnisweep/rng.hpp"
#include "omnisweep/sphere_grid.hpp"
#include "omnisweep/synth.hpp"
#include "omnisweep/teacher.hpp"

using namespace omnisweep;

namespace {

RigConfig test_rig() {
  RigConfig rig = default_hexagon_rig(0.17, 60, 320, 180);
  rig.min_depth = 0.5;
  rig.max_depth = 20;
  rig.sphere_width = 240;
  rig.sphere_height = 120;
  rig.crop_rows = {40, 80};
  return rig;
}

std::vector<ImageF> blank_views(const RigConfig& rig) {
  std::vector<ImageF> v;
  for (const FisheyeCamera& cam : rig.cameras) v.emplace_back(cam.width, cam.height, 0.5f);
  return v;
}

Vec3 pinhole_local(const VirtualPinhole& vp, const Vec3& world) {
  return vp.pose.rotation.transpose() * (world - vp.pose.translation);
}

Vec2 pinhole_project(const VirtualPinhole& vp, const Vec3& world) {
  const Vec3 p = pinhole_local(vp, world);
  return Vec2(vp.fx() * p.x() / p.z() + vp.cx(), vp.fy() * p.y() / p.z() + vp.cy());
}

Scene shell_scene(double radius, uint64_t seed, double scale) {
  Scene scene;
  Primitive p;
  p.kind = PrimitiveKind::kSphere;
  p.size = Vec3::Constant(radius);
  p.texture.kind = TextureKind::kNoise;
  p.texture.seed = seed;
  p.texture.scale = scale;
  scene.primitives.push_back(p);
  return scene;
}

}  // namespace

TEST_SUITE_BEGIN("teacher");

TEST_CASE("hexagon adjacency and the six unique pairs") {
  CHECK(cameras_adjacent(0, 1));
  CHECK(cameras_adjacent(5, 0));
  CHECK(cameras_adjacent(3, 2));
  CHECK_FALSE(cameras_adjacent(0, 2));
  CHECK_FALSE(cameras_adjacent(1, 4));
  CHECK_FALSE(cameras_adjacent(0, 0));
  CHECK_FALSE(cameras_adjacent(-1, 0));

  const auto pairs = adjacent_pairs();
  REQUIRE(pairs.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(pairs[i].first == i);
    CHECK(pairs[i].second == (i + 1) % 6);
  }
}

TEST_CASE("rectified pinholes: shared rotation, baseline, epipolar rows") {
  const RigConfig rig = test_rig();
  const std::vector<ImageF> views = blank_views(rig);

  CHECK_THROWS_AS(rectify_pair(rig, views, 0, 2), std::invalid_argument);

  Rng rng(17);
  for (const auto& [i, j] : adjacent_pairs()) {
    const StereoPair pair = rectify_pair(rig, views, i, j, {96, 96, 75, 75});
    CHECK(pair.cam_left == i);
    CHECK(pair.cam_right == j);
    CHECK(pair.baseline == doctest::Approx(0.17).epsilon(1e-12));
    CHECK(pair.focal == doctest::Approx(96 / (2 * std::tan(deg_to_rad(37.5)))).epsilon(1e-12));

    const Mat3& rot = pair.pinhole_left.pose.rotation;
    CHECK(rot.isApprox(pair.pinhole_right.pose.rotation, 1e-15));
    const Vec3 ci = rig.cameras[i].center_rig(), cj = rig.cameras[j].center_rig();
    CHECK(rot.col(0).isApprox((cj - ci).normalized(), 1e-12));
    CHECK(std::abs(rot.col(2).dot(rot.col(0))) < 1e-12);

    // Pair (i, i+1) looks along the bisector azimuth 60i + 30 degrees.
    const double want_yaw = std::remainder(60.0 * i + 30.0, 360.0);
    CHECK(std::remainder(pair.pair_yaw_deg - want_yaw, 360.0) ==
          doctest::Approx(0).epsilon(1e-9));

    // Scene points land on equal rows; disparity encodes rectified depth.
    const Vec3 mid = (ci + cj) / 2;
    for (int s = 0; s < 50; ++s) {
      const double z = rng.uniform(1.0, 8.0);
      const Vec3 world = mid + rot * Vec3(rng.uniform(-0.4, 0.4) * z,
                                          rng.uniform(-0.4, 0.4) * z, z);
      const Vec2 pl = pinhole_project(pair.pinhole_left, world);
      const Vec2 pr = pinhole_project(pair.pinhole_right, world);
      REQUIRE(std::abs(pl.y() - pr.y()) < 1e-9);
      const double disp = pl.x() - pr.x();
      REQUIRE(disp > 0);
      const double z_rect = pinhole_local(pair.pinhole_left, world).z();
      REQUIRE(pair.focal * pair.baseline / disp == doctest::Approx(z_rect).epsilon(1e-9));
    }
  }
}

TEST_CASE("block matching recovers a fronto-parallel wall to 0.3 px") {
  const RigConfig rig = test_rig();
  const std::vector<ImageF> blanks = blank_views(rig);
  const StereoPair geom = rectify_pair(rig, blanks, 0, 1, {256, 256, 75, 75});

  // Wall perpendicular to the rectified z axis, 3 m from both centers.
  const Vec3 z_axis = geom.pinhole_left.pose.rotation.col(2);
  const Vec3 mid =
      (geom.pinhole_left.pose.translation + geom.pinhole_right.pose.translation) / 2;
  Scene scene;
  Primitive wall;
  wall.kind = PrimitiveKind::kPlane;
  wall.pose.rotation = geom.pinhole_left.pose.rotation;  // local z = rectified z
  wall.pose.translation = mid + 3.0 * z_axis;
  wall.texture.kind = TextureKind::kNoise;
  wall.texture.seed = 5;
  wall.texture.scale = 0.08;
  scene.primitives.push_back(wall);

  std::vector<ImageF> views = blank_views(rig);
  views[0] = render_fisheye(scene, rig.cameras[0]);
  views[1] = render_fisheye(scene, rig.cameras[1]);

  const StereoPair pair = rectify_pair(rig, views, 0, 1, {256, 256, 75, 75});
  const ImageF disp = block_match(pair, 32, 9);

  const double expected = pair.focal * pair.baseline / 3.0;
  std::vector<float> good;
  int valid = 0, close = 0;
  for (float d : disp.data) {
    if (d < 0) continue;
    ++valid;
    if (std::abs(d - expected) <= 0.3) ++close;
    good.push_back(d);
  }
  REQUIRE(valid > 256 * 256 / 4);
  CHECK(close > valid * 8 / 10);
  std::nth_element(good.begin(), good.begin() + good.size() / 2, good.end());
  CHECK(good[good.size() / 2] == doctest::Approx(expected).epsilon(0.3 / expected));
}

TEST_CASE("identical left and right images match at zero disparity") {
  StereoPair pair;
  pair.baseline = 0.17;
  pair.focal = 100;
  pair.left = ImageF(64, 64);
  Rng rng(23);
  for (float& v : pair.left.data) v = float(rng.uniform());
  pair.right = pair.left;

  const ImageF disp = block_match(pair, 16, 7);
  int valid = 0;
  for (float d : disp.data) {
    if (d < 0) continue;
    ++valid;
    REQUIRE(std::abs(d) <= 0.05);
  }
  CHECK(valid > 64 * 64 / 2);
}

TEST_CASE("cross check masks the half-occlusion behind a near box") {
  const RigConfig rig = test_rig();

  Scene scene = shell_scene(8, 31, 0.2);
  Primitive box;
  box.kind = PrimitiveKind::kBox;
  const double yaw = deg_to_rad(30);
  box.pose.translation = 2.0 * Vec3(std::cos(yaw), std::sin(yaw), 0);
  box.pose.rotation << std::cos(yaw), -std::sin(yaw), 0, std::sin(yaw), std::cos(yaw), 0, 0, 0, 1;
  box.size = Vec3::Constant(0.3);
  box.texture.kind = TextureKind::kNoise;
  box.texture.seed = 32;
  box.texture.scale = 0.05;
  scene.primitives.push_back(box);

  std::vector<ImageF> views = blank_views(rig);
  views[0] = render_fisheye(scene, rig.cameras[0]);
  views[1] = render_fisheye(scene, rig.cameras[1]);

  const StereoPair pair = rectify_pair(rig, views, 0, 1, {256, 256, 75, 75});
  const BlockMatchMaps maps = block_match_full(pair, 64, 9);

  // The box sits dead ahead of the pair; its occlusion shadow must leave
  // invalid pixels in the cross-checked map that the unverified map fills.
  int masked = 0, filled = 0, verified = 0;
  for (size_t e = 0; e < maps.left.data.size(); ++e) {
    if (maps.left.data[e] >= 0) ++verified;
    if (maps.left.data[e] < 0 && maps.left_all.data[e] >= 0) {
      ++masked;
      ++filled;
    }
  }
  CHECK(verified > 256 * 256 / 3);
  CHECK(masked > 200);
  CHECK(filled == masked);

  // Left and right maps agree through the disparity link d = xL - xR.
  int checked = 0;
  for (int y = 0; y < 256; y += 5) {
    for (int x = 0; x < 256; x += 5) {
      const float dl = maps.left.at(y, x);
      if (dl < 0) continue;
      const int xr = x - int(std::lround(dl));
      if (xr < 0) continue;
      const float dr = maps.right.at(y, xr);
      if (dr < 0) continue;
      REQUIRE(std::abs(dl - dr) <= 1.0 + 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("fusion: single view, median robustness, rescue tier") {
  RigConfig rig = test_rig();
  const SphereGrid grid = build_sphere_grid(48, 24);
  const int row_begin = 8, row_end = 16;

  VirtualPinhole vp;
  vp.width = vp.height = 96;
  vp.hfov_deg = vp.vfov_deg = 60;
  vp.pose.rotation.col(0) = Vec3(0, -1, 0);
  vp.pose.rotation.col(1) = Vec3(0, 0, -1);
  vp.pose.rotation.col(2) = Vec3(1, 0, 0);  // looks along rig +x from the origin

  const double focal = vp.fx(), baseline = 0.17;
  const auto const_disp = [&](double z) {
    return ImageF(vp.width, vp.height, float(focal * baseline / z));
  };

  const ImageF d5 = const_disp(5.0);
  std::vector<FusionView> one = {{&d5, &vp, baseline, focal, 0.0}};
  const PanoramaLabel single = fuse_views(one, rig, grid, row_begin, row_end);

  const size_t center = single.depth.index(12 - row_begin, 24);  // horizon, azimuth 0
  REQUIRE(single.support[center] == 1);
  CHECK(single.depth.depth[center] == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(single.depth.confidence[center] == 1.0f);
  CHECK(single.source_yaw[center] == 0.0f);

  // Median of contributors {4.9, 5.0, 9.0} is 5.0.
  const ImageF d49 = const_disp(4.9), d90 = const_disp(9.0);
  std::vector<FusionView> three = {{&d49, &vp, baseline, focal, 0.0},
                                   {&d5, &vp, baseline, focal, 120.0},
                                   {&d90, &vp, baseline, focal, 240.0}};
  const PanoramaLabel fused = fuse_views(three, rig, grid, row_begin, row_end);
  REQUIRE(fused.support[center] == 3);
  CHECK(fused.depth.depth[center] == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(fused.source_yaw[center] == 120.0f);  // the median contributor's yaw

  // Rescue: a hole in the verified tier inherits the unverified consensus
  // at reduced confidence.
  ImageF holed = d5;
  for (int y = 0; y < holed.height; ++y)
    for (int x = 40; x < 56; ++x) holed.at(y, x) = -1.0f;
  std::vector<FusionView> verified = {{&holed, &vp, baseline, focal, 0.0}};
  std::vector<FusionView> unverified = {{&d49, &vp, baseline, focal, 0.0}};
  const PanoramaLabel rescued =
      fuse_with_rescue(verified, unverified, rig, grid, row_begin, row_end);
  REQUIRE(rescued.support[center] >= 1);
  CHECK(rescued.depth.depth[center] == doctest::Approx(4.9).epsilon(2e-3));
  CHECK(rescued.depth.confidence[center] <= 0.26f);

  // Incomplete view descriptors are rejected.
  std::vector<FusionView> broken = {{nullptr, &vp, baseline, focal, 0.0}};
  CHECK_THROWS_AS(fuse_views(broken, rig, grid, row_begin, row_end), std::invalid_argument);
}

TEST_CASE("teacher chain labels a textured shell") {
  const RigConfig rig = test_rig();
  const Scene scene = shell_scene(3, 41, 0.08);

  std::vector<ImageF> views;
  for (const FisheyeCamera& cam : rig.cameras) views.push_back(render_fisheye(scene, cam));

  const SphereGrid grid = build_sphere_grid(rig.sphere_width, rig.sphere_height);
  const PanoramaLabel label = teacher_pseudo_label(rig, views, grid, rig.crop_rows.first,
                                                   rig.crop_rows.second, {192, 192, 75, 75}, 48, 9);

  const DepthMap gt = render_groundtruth_erp(scene, grid, rig.crop_rows.first,
                                             rig.crop_rows.second);

  size_t supported = 0;
  for (size_t e = 0; e < label.support.size(); ++e) {
    if (label.support[e] == 0) continue;
    ++supported;
    REQUIRE(label.depth.depth[e] >= float(rig.min_depth));
    REQUIRE(label.depth.depth[e] <= float(rig.max_depth));
  }
  CHECK(supported == label.support.size());  // rescue closes every band cell

  const MetricReport report = evaluate(label.depth, gt, 10.0);
  CHECK(report.absrel < 0.08);
  CHECK(report.n_valid == gt.depth.size());

  // Source yaws name one of the six pair bisectors.
  for (size_t e = 0; e < label.source_yaw.size(); ++e) {
    const int yaw = int(std::lround(label.source_yaw[e]));
    const int norm = ((yaw % 360) + 360) % 360;
    REQUIRE(norm % 60 == 30);
  }
}

TEST_CASE("imported-disparity fusion equals the explicit left-view fusion") {
  const RigConfig rig = test_rig();
  const std::vector<ImageF> views = blank_views(rig);
  const SphereGrid grid = build_sphere_grid(rig.sphere_width, rig.sphere_height);

  std::vector<StereoPair> pairs;
  std::vector<ImageF> disparities;
  for (const auto& [i, j] : adjacent_pairs()) {
    pairs.push_back(rectify_pair(rig, views, i, j, {96, 96, 75, 75}));
    disparities.emplace_back(96, 96, float(pairs.back().focal * 0.17 / 4.0));
  }

  const PanoramaLabel via_wrapper =
      fuse_panorama(disparities, pairs, rig, grid, rig.crop_rows.first, rig.crop_rows.second);

  std::vector<FusionView> explicit_views;
  for (size_t p = 0; p < pairs.size(); ++p)
    explicit_views.push_back({&disparities[p], &pairs[p].pinhole_left, pairs[p].baseline,
                              pairs[p].focal, pairs[p].pair_yaw_deg});
  const PanoramaLabel direct = fuse_views(explicit_views, rig, grid, rig.crop_rows.first,
                                          rig.crop_rows.second);

  CHECK(via_wrapper.depth.depth == direct.depth.depth);
  CHECK(via_wrapper.support == direct.support);
  CHECK(via_wrapper.source_yaw == direct.source_yaw);
}

TEST_SUITE_END();

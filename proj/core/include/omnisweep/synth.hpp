#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "omnisweep/geometry.hpp"
#include "omnisweep/image.hpp"
#include "omnisweep/matching.hpp"
#include "omnisweep/sphere_grid.hpp"

namespace omnisweep {

enum class PrimitiveKind { kSphere, kPlane, kBox };
enum class TextureKind { kChecker, kNoise };

// Procedural texture evaluated in the primitive's local frame; a pure
// function of (seed, position), so renders are schedule-independent.
struct Texture {
  TextureKind kind = TextureKind::kChecker;
  uint64_t seed = 0;
  double scale = 0.1;  // meters per checker cell / noise cell
  double lo = 0.1;
  double hi = 0.9;
};

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kSphere;
  RigidPose pose;  // local-to-rig; planes occupy local z=0, boxes are
                   // centered, spheres ignore rotation
  Vec3 size = Vec3(1, 1, 1);  // sphere: x=radius; box: half extents; plane: unused
  Texture texture;
};

struct Scene {
  std::vector<Primitive> primitives;
  double background = 0.5;

  void validate() const;
};

Scene load_scene(const std::string& path);
void save_scene(const std::string& path, const Scene& scene);

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  int prim = -1;
  Vec3 point = Vec3::Zero();  // rig frame
  Vec3 local = Vec3::Zero();  // primitive frame (texture lookup)
};

// Nearest intersection along origin + t*dir, t > 1e-9. Returns false on miss.
bool trace(const Scene& scene, const Vec3& origin, const Vec3& dir, RayHit& hit);

double texture_value(const Primitive& prim, const Vec3& local_point);

// Raycast render of one fisheye view: per pixel, unproject, trace, shade by
// the hit primitive's texture (flat ambient); misses paint `background`.
// supersample > 1 averages a jittered subpixel grid; jitter is a hash of
// (seed, pixel, sample), so output is deterministic and thread-independent.
ImageF render_fisheye(const Scene& scene, const FisheyeCamera& cam, int supersample = 1,
                      uint64_t seed = 0, int threads = 1);

// Exact hit distance from the rig origin per grid direction over rows
// [row_begin, row_end); misses get depth 0 (invalid) and confidence 0.
DepthMap render_groundtruth_erp(const Scene& scene, const SphereGrid& grid, int row_begin,
                                int row_end, int threads = 1);

}  // namespace omnisweep

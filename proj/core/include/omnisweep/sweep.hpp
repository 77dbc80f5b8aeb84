#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "omnisweep/geometry.hpp"
#include "omnisweep/sphere_grid.hpp"

namespace omnisweep {

// Dense per-camera feature image, channel-interleaved: data[(y*width + x)*channels + c].
// `stride` records the sampling pitch relative to the source image.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  int stride = 1;
  std::vector<float> data;

  const float* at(int y, int x) const { return &data[(size_t(y) * width + x) * channels]; }
  float* at(int y, int x) { return &data[(size_t(y) * width + x) * channels]; }
};

// Warped feature volume on the sphere grid: data[((d*height + h)*width + w)*channels + c],
// valid[(d*height + h)*width + w].
struct FeatureSphere {
  int channels = 0;
  int depths = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
  std::vector<uint8_t> valid;

  size_t cell(int d, int h, int w) const {
    return (size_t(d) * height + h) * width + w;
  }
  const float* at(int d, int h, int w) const { return &data[cell(d, h, w) * channels]; }
  float* at(int d, int h, int w) { return &data[cell(d, h, w) * channels]; }
};

// Precomputed sphere-to-image lookup. One entry per (depth, row, col); entries
// are stored depth-major so a warp streams each depth slice contiguously.
// Source coordinates are in feature-map units (pixel / stride).
struct MappingTable {
  int group_id = -1;        // sweep group this table serves
  int source_camera = -1;   // fixed camera for per-camera tables, -1 for combined
  int depths = 0;
  int height = 0;
  int width = 0;
  int stride = 1;
  std::array<int32_t, 6> feat_width{};   // expected feature-map dims per camera
  std::array<int32_t, 6> feat_height{};
  std::vector<double> src_x;
  std::vector<double> src_y;
  std::vector<uint8_t> cam_index;
  std::vector<uint8_t> valid;
  uint64_t valid_count = 0;

  uint64_t op_count() const { return uint64_t(depths) * height * width; }
  size_t index(int d, int h, int w) const {
    return (size_t(d) * height + h) * width + w;
  }

  struct Entry {
    int camera = -1;
    double src_x = 0, src_y = 0;
    // bilinear weights for (x0,y0),(x1,y0),(x0,y1),(x1,y1)
    double w00 = 0, w10 = 0, w01 = 0, w11 = 0;
    bool valid = false;
  };
  Entry entry(int d, int h, int w) const;
};

// Per-cell winning camera for stitching the six per-camera spheres into the
// two group panoramas. 255 marks cells no camera of the group covers.
struct StitchPlan {
  int depths = 0;
  int height = 0;
  int width = 0;
  std::array<std::vector<uint8_t>, 2> winner;

  static constexpr uint8_t kNone = 255;
  size_t index(int d, int h, int w) const {
    return (size_t(d) * height + h) * width + w;
  }
};

struct ConventionalTables {
  std::array<MappingTable, 6> tables;
  StitchPlan plan;
};

// One lookup table per physical camera plus the stitch plan that merges them.
// Memory note: six full-resolution tables are large; callers that must stay
// lean can combine build_stitch_plan with one build_table_camera at a time.
ConventionalTables build_table_conventional(const RigConfig& rig, const SphereGrid& grid,
                                            const DepthHypotheses& hyp, int stride = 1,
                                            int threads = 1);

// Stitch plan alone, recomputing per-camera validity on the fly. Uses the
// identical projection path as the table builders, so its winners agree with
// combined-table camera choices exactly.
StitchPlan build_stitch_plan(const RigConfig& rig, const SphereGrid& grid,
                             const DepthHypotheses& hyp, int stride = 1, int threads = 1);

// Single-camera table; building block of the conventional route.
MappingTable build_table_camera(const RigConfig& rig, int cam, const SphereGrid& grid,
                                const DepthHypotheses& hyp, int stride = 1, int threads = 1);

// One table per sweep group with the camera choice folded in: each entry
// already names the camera the stitch rule would pick, so a single warp per
// group replaces warp-all-then-stitch.
std::array<MappingTable, 2> build_table_combined(const RigConfig& rig, const SphereGrid& grid,
                                                 const DepthHypotheses& hyp, int stride = 1,
                                                 int threads = 1);

struct WarpStats {
  uint64_t budgeted_ops = 0;   // sum of op_count() over applied tables
  uint64_t valid_gathers = 0;  // bilinear gathers actually executed
};

// Applies a mapping table to the per-camera feature maps. Invalid entries
// produce zero features and valid=0. Output is bitwise independent of the
// thread count.
FeatureSphere warp_features(std::span<const FeatureMap> per_camera, const MappingTable& table,
                            int threads = 1, WarpStats* stats = nullptr);

// Merges six per-camera spheres into one group panorama via the stitch plan.
FeatureSphere stitch_spheres(const std::array<FeatureSphere, 6>& spheres, const StitchPlan& plan,
                             int group, int threads = 1);

// Folds one camera's sphere into a group panorama at the cells the plan
// assigns to that camera. Allocates `dst` on first use, so callers can stream
// cameras one at a time without holding all six spheres.
void stitch_accumulate(FeatureSphere& dst, const FeatureSphere& src, const StitchPlan& plan,
                       int group, int cam, int threads = 1);

// Conventional route, memory-bounded: warps one camera at a time and folds it
// into the group panoramas through the stitch plan.
std::array<FeatureSphere, 2> conventional_sweep(std::span<const FeatureMap> per_camera,
                                                const ConventionalTables& tabs, int threads = 1,
                                                WarpStats* stats = nullptr);

// Cyclic column shift: out[..., c] = in[..., (c - k) mod width], i.e. content
// moves toward increasing azimuth by k columns. `rows` is the product of all
// leading dims, `elem` the per-cell element count.
template <typename T>
std::vector<T> rotate_columns(const std::vector<T>& in, size_t rows, int width, int elem, int k) {
  std::vector<T> out(in.size());
  int shift = k % width;
  if (shift < 0) shift += width;
  for (size_t r = 0; r < rows; ++r) {
    const T* src = &in[r * size_t(width) * elem];
    T* dst = &out[r * size_t(width) * elem];
    for (int c = 0; c < width; ++c) {
      int sc = c - shift;
      if (sc < 0) sc += width;
      for (int e = 0; e < elem; ++e) dst[size_t(c) * elem + e] = src[size_t(sc) * elem + e];
    }
  }
  return out;
}

FeatureSphere rotate_sphere_columns(const FeatureSphere& s, int k);

}  // namespace omnisweep

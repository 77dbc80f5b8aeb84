#pragma once

#include <cstdint>
#include <vector>

#include "omnisweep/image.hpp"
#include "omnisweep/sphere_grid.hpp"
#include "omnisweep/sweep.hpp"

namespace omnisweep {

// Patch descriptors are feature maps whose `stride` records the sampling
// pitch relative to the source image.
using DescriptorMap = FeatureMap;

// Per-hypothesis similarity between the two group spheres.
struct CostVolume {
  int depths = 0;
  int height = 0;
  int width = 0;
  std::vector<float> scores;   // (d,h,w); 0 where invalid or textureless
  std::vector<uint8_t> valid;  // both groups valid

  size_t index(int d, int h, int w) const {
    return (size_t(d) * height + h) * width + w;
  }
};

// Cropped panoramic depth band. depth == 0 marks pixels with no estimate.
struct DepthMap {
  int width = 0;
  int height = 0;
  int row_begin = 0;  // first sphere-grid row covered by the band
  std::vector<float> depth;       // meters
  std::vector<float> confidence;  // [0,1]

  size_t index(int r, int c) const { return size_t(r) * width + c; }
};

enum class ReadoutMode { kSoft, kWta };

// Zero-mean, L2-normalized p*p patch around every stride-th pixel, so the
// cosine similarity of two descriptors is exactly their NCC. Patches whose
// variance falls below eps_tex come out as zero vectors.
DescriptorMap extract_descriptors(const ImageF& image, int patch, int stride = 1,
                                  double eps_tex = 1e-4, int threads = 1);

// scores[d,h,w] = cos angle between the two feature vectors; 0 when either
// vector is near zero or either cell is invalid. valid = both cells valid.
CostVolume compute_cost(const FeatureSphere& a, const FeatureSphere& b, int threads = 1);

// Multi-scale wrap-aware smoothing. Level l applies a box filter of radius
// radius*2^(l-1) to the previous level (horizontal wrap, vertical clamp);
// stage s averages levels 1..s with equal weights. Returns all L stages,
// last one being the most aggregated. No decimation anywhere, so integer
// column rotation commutes with aggregation exactly.
std::vector<CostVolume> aggregate_cost_stages(const CostVolume& vol, int levels, int radius,
                                              int threads = 1);

// Final stage of aggregate_cost_stages.
CostVolume aggregate_cost(const CostVolume& vol, int levels, int radius, int threads = 1);

// Collapses the depth axis over rows [row_begin, row_end). wta picks the
// best-scoring hypothesis (ties to the nearer depth). soft forms weights
// w_d proportional to max(score_d, 0)^beta over valid entries and applies a
// soft-argmax in inverse depth; a column with no positive score falls back
// to wta with confidence 0. Columns with no valid entry get depth 0.
DepthMap read_depth(const CostVolume& vol, const DepthHypotheses& hyp, ReadoutMode mode,
                    double beta, int row_begin, int row_end, int threads = 1);

// Back-projection of the depth band to rig-frame points.
struct PointCloud {
  std::vector<float> xyz;       // 3 floats per point
  std::vector<uint8_t> gray;    // one per point; 128 when no intensity given
  std::vector<float> distance;  // point range in meters

  size_t size() const { return distance.size(); }
};

PointCloud depth_to_pointcloud(const DepthMap& depth, const SphereGrid& grid,
                               const ImageF* intensities = nullptr);

// Affine resample about the image center: translate by (tx, ty), rotate by
// angle_deg, scale isotropically; bilinear with edge clamping.
ImageF warp_affine(const ImageF& image, double tx, double ty, double angle_deg, double scale);

// Seeded random small affine warp (translation, rotation, isotropic scale
// about the image center) with bilinear resampling; models optical-axis
// jitter. Identical seeds give identical outputs.
ImageF optical_axis_shift(const ImageF& image, double max_shift, uint64_t seed,
                          double max_rot_deg = 0.5, double max_scale = 0.01);

CostVolume rotate_cost_columns(const CostVolume& vol, int k);

}  // namespace omnisweep

#pragma once

#include <array>
#include <span>

#include "omnisweep/geometry.hpp"
#include "omnisweep/matching.hpp"
#include "omnisweep/sphere_grid.hpp"
#include "omnisweep/sweep.hpp"

namespace omnisweep {

// Depth-estimation parameters. Sphere dims, hypothesis count and crop rows
// default to the rig's values; overriding sphere_height rescales the crop.
struct EstimateConfig {
  int stride = 4;
  int patch = 5;
  int levels = 3;
  int radius = 2;
  double beta = 8.0;
  ReadoutMode mode = ReadoutMode::kSoft;
  int threads = 1;
  int sphere_width = 0;    // <=0: rig.sphere_width
  int sphere_height = 0;   // <=0: rig.sphere_height
  int num_hypotheses = 0;  // <=0: rig.num_hypotheses
  int crop_begin = -1;     // <0: rig.crop_rows scaled to the grid height
  int crop_end = -1;
};

struct ResolvedEstimateConfig {
  int sphere_width = 0, sphere_height = 0, num_hypotheses = 0;
  int crop_begin = 0, crop_end = 0;
};

ResolvedEstimateConfig resolve_config(const RigConfig& rig, const EstimateConfig& cfg);

struct StageTimes {
  double descriptor = 0;
  double warp = 0;
  double cost = 0;
  double aggregate = 0;
  double readout = 0;
  double total() const { return descriptor + warp + cost + aggregate + readout; }
};

// Full combined-route pipeline: descriptors -> one warp per group -> cosine
// cost -> multi-scale aggregation -> depth readout over the cropped band.
// `tables` may carry prebuilt combined tables (they must match the resolved
// grid/stride); when null they are built internally.
DepthMap estimate_depth(const RigConfig& rig, std::span<const ImageF> images,
                        const EstimateConfig& cfg,
                        const std::array<MappingTable, 2>* tables = nullptr,
                        StageTimes* times = nullptr, WarpStats* stats = nullptr);

}  // namespace omnisweep

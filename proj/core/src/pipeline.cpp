#include "omnisweep/pipeline.hpp"

#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnisweep {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ResolvedEstimateConfig resolve_config(const RigConfig& rig, const EstimateConfig& cfg) {
  ResolvedEstimateConfig r;
  r.sphere_width = cfg.sphere_width > 0 ? cfg.sphere_width : rig.sphere_width;
  r.sphere_height = cfg.sphere_height > 0 ? cfg.sphere_height : rig.sphere_height;
  r.num_hypotheses = cfg.num_hypotheses > 0 ? cfg.num_hypotheses : rig.num_hypotheses;
  if (cfg.crop_begin >= 0 && cfg.crop_end > cfg.crop_begin) {
    r.crop_begin = cfg.crop_begin;
    r.crop_end = cfg.crop_end;
  } else {
    // Scale the rig's crop band to the working grid height.
    r.crop_begin = int(int64_t(rig.crop_rows.first) * r.sphere_height / rig.sphere_height);
    r.crop_end = int(int64_t(rig.crop_rows.second) * r.sphere_height / rig.sphere_height);
  }
  if (r.crop_begin < 0 || r.crop_end > r.sphere_height || r.crop_begin >= r.crop_end)
    throw std::invalid_argument("estimate: crop rows out of range for the sphere grid");
  return r;
}

DepthMap estimate_depth(const RigConfig& rig, std::span<const ImageF> images,
                        const EstimateConfig& cfg, const std::array<MappingTable, 2>* tables,
                        StageTimes* times, WarpStats* stats) {
  if (images.size() != 6) throw std::invalid_argument("estimate: expected 6 input images");
  for (int i = 0; i < 6; ++i)
    if (images[i].width != rig.cameras[i].width || images[i].height != rig.cameras[i].height)
      throw std::invalid_argument("estimate: image " + std::to_string(i) + " is " +
                                  std::to_string(images[i].width) + "x" +
                                  std::to_string(images[i].height) + ", rig camera expects " +
                                  std::to_string(rig.cameras[i].width) + "x" +
                                  std::to_string(rig.cameras[i].height));

  const ResolvedEstimateConfig rc = resolve_config(rig, cfg);
  const SphereGrid grid = build_sphere_grid(rc.sphere_width, rc.sphere_height);
  const DepthHypotheses hyp =
      sample_hypotheses(rig.min_depth, rig.max_depth, rc.num_hypotheses);

  std::array<MappingTable, 2> built;
  if (!tables) {
    built = build_table_combined(rig, grid, hyp, cfg.stride, cfg.threads);
    tables = &built;
  }
  for (const MappingTable& t : *tables)
    if (t.depths != hyp.count() || t.height != grid.height || t.width != grid.width ||
        t.stride != cfg.stride)
      throw std::invalid_argument("estimate: prebuilt table does not match the configuration");

  StageTimes st;
  auto t0 = std::chrono::steady_clock::now();

  std::vector<FeatureMap> descriptors;
  descriptors.reserve(6);
  for (int i = 0; i < 6; ++i)
    descriptors.push_back(
        extract_descriptors(images[i], cfg.patch, cfg.stride, 1e-4, cfg.threads));
  st.descriptor = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  FeatureSphere sphere_a =
      warp_features(std::span<const FeatureMap>(descriptors), (*tables)[0], cfg.threads, stats);
  FeatureSphere sphere_b =
      warp_features(std::span<const FeatureMap>(descriptors), (*tables)[1], cfg.threads, stats);
  st.warp = seconds_since(t0);
  descriptors.clear();
  descriptors.shrink_to_fit();

  t0 = std::chrono::steady_clock::now();
  CostVolume cost = compute_cost(sphere_a, sphere_b, cfg.threads);
  st.cost = seconds_since(t0);
  sphere_a = FeatureSphere{};
  sphere_b = FeatureSphere{};

  t0 = std::chrono::steady_clock::now();
  cost = aggregate_cost(cost, cfg.levels, cfg.radius, cfg.threads);
  st.aggregate = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  DepthMap depth =
      read_depth(cost, hyp, cfg.mode, cfg.beta, rc.crop_begin, rc.crop_end, cfg.threads);
  st.readout = seconds_since(t0);

  if (times) *times = st;
  return depth;
}

}  // namespace omnisweep

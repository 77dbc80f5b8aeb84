#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omnisweep/pipeline.hpp"
#include "omnisweep/sphere_grid.hpp"
#include "omnisweep/sweep.hpp"
#include "omnisweep/synth.hpp"

namespace omnisweep {

enum class SweepMethod { kConventional, kCombined };

struct BenchResult {
  std::string method;
  uint64_t op_count = 0;              // budgeted gathers per frame
  std::vector<double> samples;        // seconds per run, warm-up excluded
  double seconds_min = 0, seconds_median = 0, seconds_max = 0;
  StageTimes breakdown;               // pipeline benches only
  // configuration fingerprint
  int depths = 0, height = 0, width = 0, stride = 1, threads = 1, channels = 1;
};

// Times the full warp stage (six warps plus stitch for conventional; two
// warps for combined) on fixed seeded random features. Table build and the
// warm-up run are excluded. op_count is the table-declared budget: 6*D*H*W
// conventional, 2*D*H*W combined.
BenchResult bench_sweep(const RigConfig& rig, const SphereGrid& grid, const DepthHypotheses& hyp,
                        SweepMethod method, int runs, int threads = 1, int stride = 1,
                        int channels = 1, uint64_t seed = 7);

// Times the estimate pipeline stages on synthetic renders of `scene`
// (rendering and table build excluded). Breakdown holds per-stage medians.
BenchResult bench_pipeline(const RigConfig& rig, const Scene& scene, const EstimateConfig& cfg,
                           int runs, uint64_t seed = 7);

// Stable CSV schema:
// method,depths,height,width,stride,threads,channels,runs,op_count,
// sec_min,sec_median,sec_max,sec_descriptor,sec_warp,sec_cost,sec_aggregate,sec_readout
void write_bench_csv(const std::string& path, const std::vector<BenchResult>& rows);

}  // namespace omnisweep

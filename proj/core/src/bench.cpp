#include "omnisweep/bench.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include <fstream>

#include "omnisweep/rng.hpp"

namespace omnisweep {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void fill_dispersion(BenchResult& r) {
  r.seconds_min = *std::min_element(r.samples.begin(), r.samples.end());
  r.seconds_max = *std::max_element(r.samples.begin(), r.samples.end());
  r.seconds_median = median_of(r.samples);
}

std::vector<FeatureMap> seeded_features(const RigConfig& rig, int stride, int channels,
                                        uint64_t seed) {
  std::vector<FeatureMap> maps(6);
  for (int cam = 0; cam < 6; ++cam) {
    FeatureMap& fm = maps[cam];
    fm.width = (rig.cameras[cam].width + stride - 1) / stride;
    fm.height = (rig.cameras[cam].height + stride - 1) / stride;
    fm.channels = channels;
    fm.stride = stride;
    fm.data.resize(size_t(fm.width) * fm.height * channels);
    const uint64_t cam_seed = hash_combine(seed, uint64_t(cam));
    for (size_t i = 0; i < fm.data.size(); ++i)
      fm.data[i] = float(to_unit(hash_combine(cam_seed, i)));
  }
  return maps;
}

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

BenchResult bench_sweep(const RigConfig& rig, const SphereGrid& grid, const DepthHypotheses& hyp,
                        SweepMethod method, int runs, int threads, int stride, int channels,
                        uint64_t seed) {
  if (runs < 3) throw std::invalid_argument("bench_sweep: need at least 3 runs for a median");

  BenchResult res;
  res.method = method == SweepMethod::kConventional ? "conventional" : "combined";
  res.depths = hyp.count();
  res.height = grid.height;
  res.width = grid.width;
  res.stride = stride;
  res.threads = threads;
  res.channels = channels;

  const std::vector<FeatureMap> features = seeded_features(rig, stride, channels, seed);
  const std::span<const FeatureMap> span(features);
  const uint64_t dhw = uint64_t(hyp.count()) * grid.height * grid.width;

  if (method == SweepMethod::kConventional) {
    const ConventionalTables tabs = build_table_conventional(rig, grid, hyp, stride, threads);
    uint64_t declared = 0;
    for (const MappingTable& t : tabs.tables) declared += t.op_count();
    if (declared != 6 * dhw)
      throw std::logic_error("bench_sweep: conventional op count != 6*D*H*W");
    res.op_count = declared;

    conventional_sweep(span, tabs, threads);  // warm-up
    for (int i = 0; i < runs; ++i) {
      const auto t0 = Clock::now();
      conventional_sweep(span, tabs, threads);
      res.samples.push_back(elapsed(t0));
    }
  } else {
    const std::array<MappingTable, 2> tables = build_table_combined(rig, grid, hyp, stride, threads);
    const uint64_t declared = tables[0].op_count() + tables[1].op_count();
    if (declared != 2 * dhw) throw std::logic_error("bench_sweep: combined op count != 2*D*H*W");
    res.op_count = declared;

    warp_features(span, tables[0], threads);  // warm-up
    warp_features(span, tables[1], threads);
    for (int i = 0; i < runs; ++i) {
      const auto t0 = Clock::now();
      warp_features(span, tables[0], threads);
      warp_features(span, tables[1], threads);
      res.samples.push_back(elapsed(t0));
    }
  }
  fill_dispersion(res);
  return res;
}

BenchResult bench_pipeline(const RigConfig& rig, const Scene& scene, const EstimateConfig& cfg,
                           int runs, uint64_t seed) {
  if (runs < 3) throw std::invalid_argument("bench_pipeline: need at least 3 runs for a median");

  std::vector<ImageF> images;
  images.reserve(6);
  for (int cam = 0; cam < 6; ++cam)
    images.push_back(render_fisheye(scene, rig.cameras[cam], 1, seed, cfg.threads));

  const ResolvedEstimateConfig rc = resolve_config(rig, cfg);
  const SphereGrid grid = build_sphere_grid(rc.sphere_width, rc.sphere_height);
  const DepthHypotheses hyp = sample_hypotheses(rig.min_depth, rig.max_depth, rc.num_hypotheses);
  const std::array<MappingTable, 2> tables =
      build_table_combined(rig, grid, hyp, cfg.stride, cfg.threads);

  BenchResult res;
  res.method = "pipeline";
  res.depths = hyp.count();
  res.height = grid.height;
  res.width = grid.width;
  res.stride = cfg.stride;
  res.threads = cfg.threads;
  res.channels = cfg.patch * cfg.patch;
  res.op_count = tables[0].op_count() + tables[1].op_count();

  const std::span<const ImageF> span(images);
  estimate_depth(rig, span, cfg, &tables);  // warm-up

  std::vector<StageTimes> stage_runs;
  for (int i = 0; i < runs; ++i) {
    StageTimes st;
    const auto t0 = Clock::now();
    estimate_depth(rig, span, cfg, &tables, &st);
    res.samples.push_back(elapsed(t0));
    stage_runs.push_back(st);
  }
  fill_dispersion(res);

  auto field_median = [&](double StageTimes::*field) {
    std::vector<double> v;
    for (const StageTimes& st : stage_runs) v.push_back(st.*field);
    return median_of(v);
  };
  res.breakdown.descriptor = field_median(&StageTimes::descriptor);
  res.breakdown.warp = field_median(&StageTimes::warp);
  res.breakdown.cost = field_median(&StageTimes::cost);
  res.breakdown.aggregate = field_median(&StageTimes::aggregate);
  res.breakdown.readout = field_median(&StageTimes::readout);
  return res;
}

void write_bench_csv(const std::string& path, const std::vector<BenchResult>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("bench csv: cannot open for writing: " + path);
  os << "method,depths,height,width,stride,threads,channels,runs,op_count,"
        "sec_min,sec_median,sec_max,sec_descriptor,sec_warp,sec_cost,sec_aggregate,"
        "sec_readout\n";
  os.precision(9);
  for (const BenchResult& r : rows) {
    os << r.method << ',' << r.depths << ',' << r.height << ',' << r.width << ',' << r.stride
       << ',' << r.threads << ',' << r.channels << ',' << r.samples.size() << ',' << r.op_count
       << ',' << r.seconds_min << ',' << r.seconds_median << ',' << r.seconds_max << ','
       << r.breakdown.descriptor << ',' << r.breakdown.warp << ',' << r.breakdown.cost << ','
       << r.breakdown.aggregate << ',' << r.breakdown.readout << '\n';
  }
  if (!os) throw std::runtime_error("bench csv: write failed: " + path);
}

}  // namespace omnisweep

// omnisweep: batch CLI over the sweeping depth engine.
//
// Subcommands: rig init, synth render, estimate, sweep build-tables,
// teacher pseudo-label, eval metrics, bench sweep|pipeline.
// Exit codes: 0 ok, 1 runtime failure, 2 usage/config error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "omnisweep/bench.hpp"
#include "omnisweep/eval.hpp"
#include "omnisweep/geometry.hpp"
#include "omnisweep/manifest.hpp"
#include "omnisweep/matching.hpp"
#include "omnisweep/pfm.hpp"
#include "omnisweep/pipeline.hpp"
#include "omnisweep/ply.hpp"
#include "omnisweep/png_io.hpp"
#include "omnisweep/rig_io.hpp"
#include "omnisweep/sphere_grid.hpp"
#include "omnisweep/sweep.hpp"
#include "omnisweep/synth.hpp"
#include "omnisweep/table_cache.hpp"
#include "omnisweep/teacher.hpp"

namespace fs = std::filesystem;
using namespace omnisweep;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct CommonFlags {
  std::string rig_path;
  std::string out;
  uint64_t seed = 0;
  int threads = 0;  // 0 = all cores
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& c, bool need_rig = true, bool with_out = true) {
  auto* rig = cmd->add_option("--rig", c.rig_path, "Rig configuration JSON");
  if (need_rig) rig->required();
  if (with_out) cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--seed", c.seed, "Seed for all randomness in this command");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  cmd->add_flag("--verbose", c.verbose, "Chatty progress on stderr");
}

std::pair<int, int> parse_grid(const std::string& s) {
  const size_t x = s.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= s.size())
    throw std::invalid_argument("grid: expected WIDTHxHEIGHT, got '" + s + "'");
  int w = 0, h = 0;
  try {
    w = std::stoi(s.substr(0, x));
    h = std::stoi(s.substr(x + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("grid: expected WIDTHxHEIGHT, got '" + s + "'");
  }
  if (w <= 0 || h <= 0) throw std::invalid_argument("grid: dimensions must be positive");
  return {w, h};
}

std::vector<ImageF> load_camera_images(const std::string& dir,
                                       const std::vector<std::string>& files) {
  std::vector<std::string> paths = files;
  if (paths.empty()) {
    if (dir.empty())
      throw std::invalid_argument("estimate: provide --in <dir> or six --images paths");
    for (int i = 0; i < 6; ++i)
      paths.push_back((fs::path(dir) / ("cam" + std::to_string(i) + ".png")).string());
  }
  if (paths.size() != 6)
    throw std::invalid_argument("expected 6 camera images, got " + std::to_string(paths.size()));
  std::vector<ImageF> images;
  images.reserve(6);
  for (const std::string& p : paths) images.push_back(read_png_gray(p));
  return images;
}

ImageF band_to_image(const std::vector<float>& data, int width, int height) {
  ImageF img(width, height);
  img.data.assign(data.begin(), data.end());
  return img;
}

std::string join_args(int argc, char** argv) {
  std::ostringstream os;
  for (int i = 0; i < argc; ++i) os << (i ? " " : "") << argv[i];
  return os.str();
}

RunManifest base_manifest(const std::string& command, const CommonFlags& c, uint64_t rig_hash_v) {
  RunManifest m;
  m.command = command;
  m.tool_version = kToolVersion;
  m.rig_hash = rig_hash_v;
  m.seed = c.seed;
  m.threads = c.threads;
  m.timestamp = iso8601_utc_now();
  return m;
}

void emit_manifest(const fs::path& dir, RunManifest m) {
  fs::create_directories(dir);
  const std::string path = (dir / "manifest.json").string();
  write_manifest(path, m);
}

int normalized_yaw(double yaw_deg) {
  int y = int(std::llround(yaw_deg));
  y %= 360;
  if (y < 0) y += 360;
  return y;
}

std::string disparity_name(double yaw_deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "disp_yaw%03d.pfm", normalized_yaw(yaw_deg));
  return buf;
}

// ---------------------------------------------------------------- rig init

struct RigInitArgs {
  CommonFlags common;
  double radius = 0.17, yaw_step = 60.0;
  int width = 960, height = 540;
  double hfov = 161.0, vfov = 75.0;
  std::string sphere = "960x480";
  int depths = 64;
  double min_depth = 0.5, max_depth = 100.0;
  int crop_begin = -1, crop_end = -1;
};

void setup_rig_init(CLI::App& app, RigInitArgs& a, std::string& cmdline) {
  CLI::App* rig = app.add_subcommand("rig", "Rig configuration utilities");
  rig->require_subcommand(1);
  CLI::App* c = rig->add_subcommand("init", "Write a hexagon rig configuration file");
  c->add_option("--out", a.common.out, "Output rig JSON path")->required();
  c->add_option("--radius", a.radius, "Hexagon circumradius in meters");
  c->add_option("--yaw-step", a.yaw_step, "Per-camera yaw increment in degrees");
  c->add_option("--width", a.width, "Image width in pixels");
  c->add_option("--height", a.height, "Image height in pixels");
  c->add_option("--hfov", a.hfov, "Horizontal field of view in degrees");
  c->add_option("--vfov", a.vfov, "Vertical field of view in degrees");
  c->add_option("--sphere", a.sphere, "Sphere grid as WIDTHxHEIGHT");
  c->add_option("--depths", a.depths, "Number of depth hypotheses");
  c->add_option("--min-depth", a.min_depth, "Nearest hypothesis in meters");
  c->add_option("--max-depth", a.max_depth, "Farthest hypothesis in meters");
  c->add_option("--crop-begin", a.crop_begin, "First band row (default scales with grid)");
  c->add_option("--crop-end", a.crop_end, "One past the last band row");
  c->callback([&a, &cmdline] {
    RigConfig rig = default_hexagon_rig(a.radius, a.yaw_step, a.width, a.height, a.hfov, a.vfov);
    const auto [sw, sh] = parse_grid(a.sphere);
    // Default crop tracks the grid: same angular band at any resolution.
    const int cb = a.crop_begin >= 0 ? a.crop_begin : rig.crop_rows.first * sh / rig.sphere_height;
    const int ce = a.crop_end >= 0 ? a.crop_end : rig.crop_rows.second * sh / rig.sphere_height;
    rig.sphere_width = sw;
    rig.sphere_height = sh;
    rig.crop_rows = {cb, ce};
    rig.num_hypotheses = a.depths;
    rig.min_depth = a.min_depth;
    rig.max_depth = a.max_depth;
    rig.validate();
    save_rig(rig, a.common.out);
    std::cout << "wrote " << a.common.out << " (rig hash " << std::hex << rig_hash(rig) << std::dec
              << ")\n";
    (void)cmdline;
  });
}

// -------------------------------------------------------------- synth render

struct SynthArgs {
  CommonFlags common;
  std::string scene_path;
  int supersample = 1;
  bool no_gt = false;
};

void setup_synth(CLI::App& app, SynthArgs& a, std::string& cmdline) {
  CLI::App* synth = app.add_subcommand("synth", "Analytic scene rendering");
  synth->require_subcommand(1);
  CLI::App* c = synth->add_subcommand(
      "render", "Render the six fisheye views and the ground-truth depth band");
  add_common(c, a.common);
  c->add_option("--scene", a.scene_path, "Scene description JSON")->required();
  c->add_option("--supersample", a.supersample, "Jittered samples per pixel axis")
      ->check(CLI::PositiveNumber);
  c->add_flag("--no-gt", a.no_gt, "Skip the ground-truth depth render");
  c->callback([&a, &cmdline] {
    const RigConfig rig = load_rig(a.common.rig_path);
    const Scene scene = load_scene(a.scene_path);
    const fs::path out(a.common.out);
    fs::create_directories(out);

    RunManifest m = base_manifest(cmdline, a.common, rig_hash(rig));
    m.inputs = {a.common.rig_path, a.scene_path};
    m.params["supersample"] = std::to_string(a.supersample);

    for (int cam = 0; cam < 6; ++cam) {
      const ImageF img = render_fisheye(scene, rig.cameras[cam], a.supersample, a.common.seed,
                                        a.common.threads);
      const std::string path = (out / ("cam" + std::to_string(cam) + ".png")).string();
      write_png_gray8(path, img);
      m.outputs.push_back(path);
      if (a.common.verbose) std::cerr << "rendered " << path << "\n";
    }
    if (!a.no_gt) {
      const SphereGrid grid = build_sphere_grid(rig.sphere_width, rig.sphere_height);
      const DepthMap gt = render_groundtruth_erp(scene, grid, rig.crop_rows.first,
                                                 rig.crop_rows.second, a.common.threads);
      const std::string path = (out / "gt.pfm").string();
      write_pfm(path, band_to_image(gt.depth, gt.width, gt.height));
      m.outputs.push_back(path);
      m.params["gt_grid"] =
          std::to_string(rig.sphere_width) + "x" + std::to_string(rig.sphere_height);
      m.params["gt_rows"] = std::to_string(rig.crop_rows.first) + ".." +
                            std::to_string(rig.crop_rows.second);
    }
    emit_manifest(out, m);
    std::cout << "rendered 6 views" << (a.no_gt ? "" : " + ground truth") << " to "
              << out.string() << "\n";
  });
}

// ----------------------------------------------------------------- estimate

struct EstimateArgs {
  CommonFlags common;
  std::string in_dir;
  std::vector<std::string> images;
  std::string grid;
  std::string tables_dir;
  int depths = 0;
  int stride = 4, patch = 5, levels = 3, radius = 2;
  double beta = 8.0;
  std::string mode = "soft";
  bool ply_ascii = false;
};

void setup_estimate(CLI::App& app, EstimateArgs& a, std::string& cmdline) {
  CLI::App* c = app.add_subcommand("estimate", "Panoramic depth from six fisheye images");
  add_common(c, a.common);
  c->add_option("--in", a.in_dir, "Directory holding cam0.png .. cam5.png");
  c->add_option("--images", a.images, "Explicit six image paths (camera order)")->expected(6);
  c->add_option("--grid", a.grid, "Sphere grid WIDTHxHEIGHT (default: rig)");
  c->add_option("--depths", a.depths, "Depth hypothesis count (default: rig)");
  c->add_option("--stride", a.stride, "Descriptor stride in pixels");
  c->add_option("--patch", a.patch, "Descriptor patch size (odd)");
  c->add_option("--levels", a.levels, "Aggregation levels");
  c->add_option("--radius", a.radius, "Base aggregation radius");
  c->add_option("--beta", a.beta, "Soft readout sharpness");
  c->add_option("--mode", a.mode, "Depth readout: soft or wta")
      ->check(CLI::IsMember({"soft", "wta"}));
  c->add_option("--tables", a.tables_dir,
                "Directory with cached combined tables (combined_g0.tbl, combined_g1.tbl)");
  c->add_flag("--ply-ascii", a.ply_ascii, "Write the point cloud as ascii PLY");
  c->callback([&a, &cmdline] {
    const RigConfig rig = load_rig(a.common.rig_path);
    const std::vector<ImageF> images = load_camera_images(a.in_dir, a.images);

    EstimateConfig cfg;
    cfg.stride = a.stride;
    cfg.patch = a.patch;
    cfg.levels = a.levels;
    cfg.radius = a.radius;
    cfg.beta = a.beta;
    cfg.mode = a.mode == "wta" ? ReadoutMode::kWta : ReadoutMode::kSoft;
    cfg.threads = a.common.threads;
    if (!a.grid.empty()) {
      const auto [w, h] = parse_grid(a.grid);
      cfg.sphere_width = w;
      cfg.sphere_height = h;
    }
    if (a.depths > 0) cfg.num_hypotheses = a.depths;

    std::array<MappingTable, 2> cached;
    const std::array<MappingTable, 2>* tables = nullptr;
    if (!a.tables_dir.empty()) {
      const uint64_t h = rig_hash(rig);
      cached[0] = load_table((fs::path(a.tables_dir) / "combined_g0.tbl").string(), h);
      cached[1] = load_table((fs::path(a.tables_dir) / "combined_g1.tbl").string(), h);
      tables = &cached;
    }

    StageTimes times;
    const DepthMap depth = estimate_depth(rig, images, cfg, tables, &times);

    const fs::path out(a.common.out);
    fs::create_directories(out);
    const std::string depth_path = (out / "depth.pfm").string();
    const std::string conf_path = (out / "confidence.pfm").string();
    const std::string png_path = (out / "depth_mm.png").string();
    const std::string ply_path = (out / "cloud.ply").string();
    write_pfm(depth_path, band_to_image(depth.depth, depth.width, depth.height));
    write_pfm(conf_path, band_to_image(depth.confidence, depth.width, depth.height));
    write_png_depth_mm(png_path, band_to_image(depth.depth, depth.width, depth.height));

    const ResolvedEstimateConfig r = resolve_config(rig, cfg);
    const SphereGrid grid = build_sphere_grid(r.sphere_width, r.sphere_height);
    write_ply(ply_path, depth_to_pointcloud(depth, grid), !a.ply_ascii);

    RunManifest m = base_manifest(cmdline, a.common, rig_hash(rig));
    m.inputs.push_back(a.common.rig_path);
    if (!a.in_dir.empty() && a.images.empty()) m.inputs.push_back(a.in_dir);
    for (const std::string& p : a.images) m.inputs.push_back(p);
    m.params["grid"] = std::to_string(r.sphere_width) + "x" + std::to_string(r.sphere_height);
    m.params["depths"] = std::to_string(r.num_hypotheses);
    m.params["crop"] = std::to_string(r.crop_begin) + ".." + std::to_string(r.crop_end);
    m.params["stride"] = std::to_string(a.stride);
    m.params["patch"] = std::to_string(a.patch);
    m.params["levels"] = std::to_string(a.levels);
    m.params["radius"] = std::to_string(a.radius);
    m.params["beta"] = std::to_string(a.beta);
    m.params["mode"] = a.mode;
    m.outputs = {depth_path, conf_path, png_path, ply_path};
    emit_manifest(out, m);

    // Median over valid band pixels: quick sanity line for operators.
    std::vector<float> valid;
    valid.reserve(depth.depth.size());
    for (float d : depth.depth)
      if (d > 0) valid.push_back(d);
    double median = 0;
    if (!valid.empty()) {
      std::nth_element(valid.begin(), valid.begin() + valid.size() / 2, valid.end());
      median = valid[valid.size() / 2];
    }
    std::cout << "band " << depth.width << "x" << depth.height << ", valid " << valid.size()
              << "/" << depth.depth.size() << ", median depth " << median << " m\n";
    if (a.common.verbose)
      std::cerr << "stage seconds: descriptor " << times.descriptor << ", warp " << times.warp
                << ", cost " << times.cost << ", aggregate " << times.aggregate << ", readout "
                << times.readout << "\n";
  });
}

// --------------------------------------------------------- sweep build-tables

struct BuildTablesArgs {
  CommonFlags common;
  std::string grid;
  int depths = 0;
  int stride = 1;
  double min_depth = 0, max_depth = 0;
  std::string route = "combined";
};

void setup_build_tables(CLI::App& app, BuildTablesArgs& a, std::string& cmdline) {
  CLI::App* sweep = app.add_subcommand("sweep", "Mapping-table operations");
  sweep->require_subcommand(1);
  CLI::App* c = sweep->add_subcommand("build-tables", "Precompute and cache mapping tables");
  add_common(c, a.common);
  c->add_option("--grid", a.grid, "Sphere grid WIDTHxHEIGHT (default: rig)");
  c->add_option("--depths", a.depths, "Depth hypothesis count (default: rig)");
  c->add_option("--stride", a.stride, "Feature stride the tables target");
  c->add_option("--min-depth", a.min_depth, "Nearest hypothesis in meters (default: rig)");
  c->add_option("--max-depth", a.max_depth, "Farthest hypothesis in meters (default: rig)");
  c->add_option("--route", a.route, "Which tables to build")
      ->check(CLI::IsMember({"combined", "conventional", "both"}));
  c->callback([&a, &cmdline] {
    const RigConfig rig = load_rig(a.common.rig_path);
    int sw = rig.sphere_width, sh = rig.sphere_height;
    if (!a.grid.empty()) std::tie(sw, sh) = parse_grid(a.grid);
    const int d = a.depths > 0 ? a.depths : rig.num_hypotheses;
    const double dmin = a.min_depth > 0 ? a.min_depth : rig.min_depth;
    const double dmax = a.max_depth > 0 ? a.max_depth : rig.max_depth;

    const SphereGrid grid = build_sphere_grid(sw, sh);
    const DepthHypotheses hyp = sample_hypotheses(dmin, dmax, d);
    const uint64_t h = rig_hash(rig);
    const fs::path out(a.common.out);
    fs::create_directories(out);

    RunManifest m = base_manifest(cmdline, a.common, h);
    m.inputs = {a.common.rig_path};
    m.params["grid"] = std::to_string(sw) + "x" + std::to_string(sh);
    m.params["depths"] = std::to_string(d);
    m.params["stride"] = std::to_string(a.stride);
    m.params["min_depth"] = std::to_string(dmin);
    m.params["max_depth"] = std::to_string(dmax);
    m.params["route"] = a.route;

    if (a.route == "combined" || a.route == "both") {
      const std::array<MappingTable, 2> tabs =
          build_table_combined(rig, grid, hyp, a.stride, a.common.threads);
      for (int g = 0; g < 2; ++g) {
        const std::string path = (out / ("combined_g" + std::to_string(g) + ".tbl")).string();
        save_table(path, tabs[g], h);
        m.outputs.push_back(path);
        std::cout << "combined group " << g << ": " << tabs[g].op_count() << " budgeted ops, "
                  << tabs[g].valid_count << " valid\n";
      }
    }
    if (a.route == "conventional" || a.route == "both") {
      for (int cam = 0; cam < 6; ++cam) {
        // One camera at a time bounds memory at a single table.
        const MappingTable t = build_table_camera(rig, cam, grid, hyp, a.stride, a.common.threads);
        const std::string path = (out / ("cam" + std::to_string(cam) + ".tbl")).string();
        save_table(path, t, h);
        m.outputs.push_back(path);
        std::cout << "camera " << cam << ": " << t.op_count() << " budgeted ops, "
                  << t.valid_count << " valid\n";
      }
    }
    emit_manifest(out, m);
  });
}

// ------------------------------------------------------ teacher pseudo-label

struct TeacherArgs {
  CommonFlags common;
  std::string in_dir;
  std::string import_dir;
  int pinhole = 512;
  double pinhole_fov = 75.0;
  int max_disp = 112;
  int patch = 11;
};

void setup_teacher(CLI::App& app, TeacherArgs& a, std::string& cmdline) {
  CLI::App* teacher = app.add_subcommand("teacher", "Rectify + block-match pseudo-labeling");
  teacher->require_subcommand(1);
  CLI::App* c = teacher->add_subcommand("pseudo-label",
                                        "Fused panoramic pseudo-label from stereo pairs");
  add_common(c, a.common);
  c->add_option("--in", a.in_dir, "Directory holding cam0.png .. cam5.png")->required();
  c->add_option("--import-disparity", a.import_dir,
                "Reuse disparities from a previous run (PFMs + manifest)");
  c->add_option("--pinhole", a.pinhole, "Virtual pinhole resolution (square)");
  c->add_option("--pinhole-fov", a.pinhole_fov, "Virtual pinhole field of view in degrees");
  c->add_option("--max-disp", a.max_disp, "Disparity search range in pixels");
  c->add_option("--patch", a.patch, "Matching patch size (odd)");
  c->callback([&a, &cmdline] {
    const RigConfig rig = load_rig(a.common.rig_path);
    const uint64_t h = rig_hash(rig);
    const std::vector<ImageF> images = load_camera_images(a.in_dir, {});
    const SphereGrid grid = build_sphere_grid(rig.sphere_width, rig.sphere_height);
    PinholeSpec spec{a.pinhole, a.pinhole, a.pinhole_fov, a.pinhole_fov};

    std::vector<StereoPair> pairs;
    for (const auto& [i, j] : adjacent_pairs())
      pairs.push_back(rectify_pair(rig, images, i, j, spec, a.common.threads));

    const fs::path out(a.common.out);
    fs::create_directories(out);
    RunManifest m = base_manifest(cmdline, a.common, h);
    m.inputs = {a.common.rig_path, a.in_dir};

    PanoramaLabel label;
    if (!a.import_dir.empty()) {
      // Imported disparities must come from the same calibration. External
      // matchers supply one left-referenced map per pair.
      const RunManifest dm = read_manifest((fs::path(a.import_dir) / "manifest.json").string());
      if (dm.rig_hash != h)
        throw std::invalid_argument("import-disparity: calibration hash mismatch (got " +
                                    std::to_string(dm.rig_hash) + ", rig has " +
                                    std::to_string(h) + ")");
      std::vector<ImageF> disparities;
      for (const StereoPair& p : pairs) {
        const fs::path f = fs::path(a.import_dir) / disparity_name(p.pair_yaw_deg);
        disparities.push_back(read_pfm(f.string()));
        m.inputs.push_back(f.string());
      }
      label = fuse_panorama(disparities, pairs, rig, grid, rig.crop_rows.first,
                            rig.crop_rows.second, a.common.threads);
    } else {
      const fs::path disp_dir = out / "disparity";
      fs::create_directories(disp_dir);
      RunManifest dm = base_manifest(cmdline, a.common, h);
      dm.params["pinhole"] = std::to_string(a.pinhole);
      dm.params["max_disp"] = std::to_string(a.max_disp);
      dm.params["patch"] = std::to_string(a.patch);
      std::string yaws;
      std::vector<BlockMatchMaps> maps(pairs.size());
      for (size_t v = 0; v < pairs.size(); ++v) {
        const StereoPair& p = pairs[v];
        maps[v] = block_match_full(p, a.max_disp, a.patch, a.common.threads);
        const std::string f = (disp_dir / disparity_name(p.pair_yaw_deg)).string();
        write_pfm(f, maps[v].left);
        dm.outputs.push_back(f);
        yaws += (yaws.empty() ? "" : ",") + std::to_string(normalized_yaw(p.pair_yaw_deg));
        if (a.common.verbose) std::cerr << "matched pair yaw " << p.pair_yaw_deg << "\n";
      }
      dm.params["pair_yaws"] = yaws;
      emit_manifest(disp_dir, dm);

      // Fuse both references of every pair (the extra six maps fill each
      // reference's margins and outvote stray mismatches); cells with no
      // cross-checked support fall back to one-eyed matches.
      std::vector<FusionView> verified, unverified;
      for (size_t v = 0; v < pairs.size(); ++v) {
        const StereoPair& p = pairs[v];
        verified.push_back({&maps[v].left, &p.pinhole_left, p.baseline, p.focal, p.pair_yaw_deg});
        verified.push_back(
            {&maps[v].right, &p.pinhole_right, p.baseline, p.focal, p.pair_yaw_deg});
        unverified.push_back(
            {&maps[v].left_all, &p.pinhole_left, p.baseline, p.focal, p.pair_yaw_deg});
        unverified.push_back(
            {&maps[v].right_all, &p.pinhole_right, p.baseline, p.focal, p.pair_yaw_deg});
      }
      label = fuse_with_rescue(verified, unverified, rig, grid, rig.crop_rows.first,
                               rig.crop_rows.second, a.common.threads);
    }

    const std::string label_path = (out / "label.pfm").string();
    const std::string png_path = (out / "label_mm.png").string();
    const std::string support_path = (out / "support.pfm").string();
    const std::string yaw_path = (out / "source_yaw.pfm").string();
    const int bw = label.depth.width, bh = label.depth.height;
    write_pfm(label_path, band_to_image(label.depth.depth, bw, bh));
    write_png_depth_mm(png_path, band_to_image(label.depth.depth, bw, bh));
    std::vector<float> support_f(label.support.begin(), label.support.end());
    write_pfm(support_path, band_to_image(support_f, bw, bh));
    write_pfm(yaw_path, band_to_image(label.source_yaw, bw, bh));

    m.params["pinhole"] = std::to_string(a.pinhole);
    m.params["pinhole_fov"] = std::to_string(a.pinhole_fov);
    m.params["max_disp"] = std::to_string(a.max_disp);
    m.params["patch"] = std::to_string(a.patch);
    m.outputs = {label_path, png_path, support_path, yaw_path};
    emit_manifest(out, m);

    size_t covered = 0, filled = 0;
    for (size_t i = 0; i < label.support.size(); ++i) {
      if (label.support[i] > 0) ++covered;
      if (label.depth.depth[i] > 0) ++filled;
    }
    std::cout << "band " << bw << "x" << bh << ", support coverage "
              << 100.0 * covered / label.support.size() << "%, labeled "
              << 100.0 * filled / label.support.size() << "%\n";
  });
}

// -------------------------------------------------------------- eval metrics

struct EvalArgs {
  CommonFlags common;
  std::string pred, gt;
  double cap = 10.0;
  std::string csv;
  std::string method = "pred", dataset = "gt";
};

DepthMap pfm_to_depthmap(const std::string& path) {
  const ImageF img = read_pfm(path);
  DepthMap d;
  d.width = img.width;
  d.height = img.height;
  d.depth = img.data;
  return d;
}

void setup_eval(CLI::App& app, EvalArgs& a, std::string& cmdline) {
  CLI::App* ev = app.add_subcommand("eval", "Depth evaluation");
  ev->require_subcommand(1);
  CLI::App* c = ev->add_subcommand("metrics", "Depth metrics between prediction and ground truth");
  c->add_option("--pred", a.pred, "Predicted depth PFM (file or directory of PFMs)")->required();
  c->add_option("--gt", a.gt, "Ground-truth depth PFM (file or directory)")->required();
  c->add_option("--cap", a.cap, "Depth cap in meters");
  c->add_option("--out", a.csv, "Also write a CSV report to this path");
  c->add_option("--method", a.method, "Method label for the CSV");
  c->add_option("--dataset", a.dataset, "Dataset label for the CSV");
  c->callback([&a, &cmdline] {
    std::vector<std::pair<std::string, std::string>> pairs;  // (pred, gt)
    std::vector<std::string> names;
    if (fs::is_directory(a.pred) != fs::is_directory(a.gt))
      throw std::invalid_argument("eval: --pred and --gt must both be files or both directories");
    if (fs::is_directory(a.pred)) {
      std::set<std::string> stems;
      for (const auto& e : fs::directory_iterator(a.pred))
        if (e.path().extension() == ".pfm") stems.insert(e.path().stem().string());
      for (const std::string& s : stems) {
        const fs::path g = fs::path(a.gt) / (s + ".pfm");
        if (fs::exists(g)) {
          pairs.emplace_back((fs::path(a.pred) / (s + ".pfm")).string(), g.string());
          names.push_back(s);
        }
      }
      if (pairs.empty())
        throw std::invalid_argument("eval: no matching .pfm basenames between the directories");
    } else {
      pairs.emplace_back(a.pred, a.gt);
      names.push_back(a.method);
    }

    std::vector<LabeledReport> rows;
    for (size_t i = 0; i < pairs.size(); ++i) {
      const DepthMap pred = pfm_to_depthmap(pairs[i].first);
      const DepthMap gt = pfm_to_depthmap(pairs[i].second);
      const MetricReport r = evaluate(pred, gt, a.cap);
      rows.push_back({names[i], a.dataset, r});
      if (pairs.size() > 1) std::cout << "== " << names[i] << "\n";
      std::cout << format_metrics(r);
    }
    if (!a.csv.empty()) {
      write_metrics_csv(a.csv, rows);
      if (a.common.verbose) std::cerr << "wrote " << a.csv << "\n";
    }
    (void)cmdline;
  });
}

// -------------------------------------------------------------------- bench

struct BenchArgs {
  CommonFlags common;
  int d = 64;
  std::string grid = "960x480";
  int runs = 5;
  int stride = 1, channels = 1;
  std::string method = "both";
  std::string scene_path;  // pipeline only
  int pipe_stride = 4, pipe_patch = 5;
};

void setup_bench(CLI::App& app, BenchArgs& a, std::string& cmdline) {
  CLI::App* bench = app.add_subcommand("bench", "Timing harness");
  bench->require_subcommand(1);

  CLI::App* bs = bench->add_subcommand("sweep", "Time the warp stage, both routes");
  add_common(bs, a.common, true, false);
  bs->add_option("--out", a.common.out, "CSV report path")->required();
  bs->add_option("--d", a.d, "Depth hypothesis count");
  bs->add_option("--grid", a.grid, "Sphere grid WIDTHxHEIGHT");
  bs->add_option("--runs", a.runs, "Timed repetitions (median reported)");
  bs->add_option("--stride", a.stride, "Feature stride");
  bs->add_option("--channels", a.channels, "Feature channels");
  bs->add_option("--method", a.method, "conventional, combined, or both")
      ->check(CLI::IsMember({"conventional", "combined", "both"}));
  bs->callback([&a, &cmdline] {
    const RigConfig rig = load_rig(a.common.rig_path);
    const auto [sw, sh] = parse_grid(a.grid);
    const SphereGrid grid = build_sphere_grid(sw, sh);
    const DepthHypotheses hyp = sample_hypotheses(rig.min_depth, rig.max_depth, a.d);

    std::vector<BenchResult> rows;
    // One method in memory at a time: conventional tables alone reach
    // gigabytes at full resolution.
    if (a.method == "conventional" || a.method == "both")
      rows.push_back(bench_sweep(rig, grid, hyp, SweepMethod::kConventional, a.runs,
                                 a.common.threads, a.stride, a.channels, a.common.seed));
    if (a.method == "combined" || a.method == "both")
      rows.push_back(bench_sweep(rig, grid, hyp, SweepMethod::kCombined, a.runs, a.common.threads,
                                 a.stride, a.channels, a.common.seed));
    for (const BenchResult& r : rows)
      std::cout << r.method << ": median " << r.seconds_median << " s over " << r.samples.size()
                << " runs, " << r.op_count << " budgeted ops\n";
    if (rows.size() == 2)
      std::cout << "speedup (conventional/combined): "
                << rows[0].seconds_median / rows[1].seconds_median << "x\n";
    write_bench_csv(a.common.out, rows);

    RunManifest m = base_manifest(cmdline, a.common, rig_hash(rig));
    m.inputs = {a.common.rig_path};
    m.params["grid"] = a.grid;
    m.params["depths"] = std::to_string(a.d);
    m.params["runs"] = std::to_string(a.runs);
    m.params["method"] = a.method;
    m.outputs = {a.common.out};
    emit_manifest(fs::path(a.common.out).parent_path().empty()
                      ? fs::path(".")
                      : fs::path(a.common.out).parent_path(),
                  m);
  });

  CLI::App* bp = bench->add_subcommand("pipeline", "Time the full estimate pipeline per stage");
  add_common(bp, a.common, true, false);
  bp->add_option("--out", a.common.out, "CSV report path")->required();
  bp->add_option("--scene", a.scene_path, "Scene JSON rendered as the timed input")->required();
  bp->add_option("--runs", a.runs, "Timed repetitions (median reported)");
  bp->add_option("--stride", a.pipe_stride, "Descriptor stride");
  bp->add_option("--patch", a.pipe_patch, "Descriptor patch size");
  bp->callback([&a, &cmdline] {
    const RigConfig rig = load_rig(a.common.rig_path);
    const Scene scene = load_scene(a.scene_path);
    EstimateConfig cfg;
    cfg.stride = a.pipe_stride;
    cfg.patch = a.pipe_patch;
    cfg.threads = a.common.threads;
    const BenchResult r = bench_pipeline(rig, scene, cfg, a.runs, a.common.seed);
    std::cout << "pipeline: median " << r.seconds_median
              << " s (descriptor " << r.breakdown.descriptor << ", warp " << r.breakdown.warp
              << ", cost " << r.breakdown.cost << ", aggregate " << r.breakdown.aggregate
              << ", readout " << r.breakdown.readout << ")\n";
    write_bench_csv(a.common.out, {r});

    RunManifest m = base_manifest(cmdline, a.common, rig_hash(rig));
    m.inputs = {a.common.rig_path, a.scene_path};
    m.params["runs"] = std::to_string(a.runs);
    m.params["stride"] = std::to_string(a.pipe_stride);
    m.params["patch"] = std::to_string(a.pipe_patch);
    m.outputs = {a.common.out};
    emit_manifest(fs::path(a.common.out).parent_path().empty()
                      ? fs::path(".")
                      : fs::path(a.common.out).parent_path(),
                  m);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"omnisweep: multi-fisheye panoramic depth via spherical sweeping"};
  app.require_subcommand(1);
  std::string cmdline = join_args(argc, argv);

  RigInitArgs rig_args;
  SynthArgs synth_args;
  EstimateArgs est_args;
  BuildTablesArgs tbl_args;
  TeacherArgs teacher_args;
  EvalArgs eval_args;
  BenchArgs bench_args;
  setup_rig_init(app, rig_args, cmdline);
  setup_synth(app, synth_args, cmdline);
  setup_estimate(app, est_args, cmdline);
  setup_build_tables(app, tbl_args, cmdline);
  setup_teacher(app, teacher_args, cmdline);
  setup_eval(app, eval_args, cmdline);
  setup_bench(app, bench_args, cmdline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean; usage errors are 2
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "omnisweep/sweep.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "omnisweep/parallel.hpp"

namespace omnisweep {

namespace {

// Per-camera state hoisted out of the projection loops.
struct CamCtx {
  Mat3 rot_t;        // world->camera rotation
  Vec3 offset;       // rot_t * translation
  FisheyeCamera::FovLimits lim;
  double inv_stride = 1;
  double max_xf = 0;  // feature-grid bounds for a valid bilinear footprint
  double max_yf = 0;
};

CamCtx make_ctx(const FisheyeCamera& cam, int stride, int feat_w, int feat_h) {
  CamCtx ctx;
  ctx.rot_t = cam.pose.rotation.transpose();
  ctx.offset = ctx.rot_t * cam.pose.translation;
  ctx.lim = cam.fov_limits();
  ctx.inv_stride = 1.0 / stride;
  ctx.max_xf = feat_w - 1;
  ctx.max_yf = feat_h - 1;
  return ctx;
}

// Projects the sphere point at depth `lambda` along camera-frame direction `a`
// and converts to feature-map coordinates. Single code path shared by every
// table builder so the two routes agree bitwise.
inline bool project_entry(const FisheyeCamera& cam, const CamCtx& ctx, double lambda,
                          const Vec3& a, double& xf, double& yf) {
  const Vec3 p = lambda * a - ctx.offset;
  if (p.x() == 0.0 && p.y() == 0.0 && p.z() == 0.0) return false;
  const ProjectResult pr = project(cam, p, ctx.lim);
  if (!pr.valid) return false;
  const double x = pr.pixel.x() * ctx.inv_stride;
  const double y = pr.pixel.y() * ctx.inv_stride;
  if (x > ctx.max_xf || y > ctx.max_yf) return false;
  xf = x;
  yf = y;
  return true;
}

int feat_dim(int image_dim, int stride) { return (image_dim + stride - 1) / stride; }

void init_table(MappingTable& t, const RigConfig& rig, const SphereGrid& grid,
                const DepthHypotheses& hyp, int stride) {
  if (stride < 1) throw std::invalid_argument("mapping table: stride must be >= 1");
  t.depths = int(hyp.count());
  t.height = grid.height;
  t.width = grid.width;
  t.stride = stride;
  for (int i = 0; i < 6; ++i) {
    t.feat_width[i] = feat_dim(rig.cameras[i].width, stride);
    t.feat_height[i] = feat_dim(rig.cameras[i].height, stride);
  }
  const size_t n = size_t(t.depths) * t.height * t.width;
  t.src_x.assign(n, 0.0);
  t.src_y.assign(n, 0.0);
  t.cam_index.assign(n, 0);
  t.valid.assign(n, 0);
  t.valid_count = 0;
}

// Camera preference at a sphere direction: descending angle-cosine to the
// optical axis, ties to the lower camera index. `cams` must be ascending.
inline void rank_cameras(const std::array<Vec3, 6>& axes, const std::array<int, 3>& cams,
                         const Vec3& dir, int out[3]) {
  double dots[3];
  for (int i = 0; i < 3; ++i) dots[i] = axes[cams[i]].dot(dir);
  int ord[3] = {0, 1, 2};
  // insertion sort, stable so equal dots keep ascending camera order
  for (int i = 1; i < 3; ++i) {
    int j = i;
    while (j > 0 && dots[ord[j]] > dots[ord[j - 1]]) {
      std::swap(ord[j], ord[j - 1]);
      --j;
    }
  }
  for (int i = 0; i < 3; ++i) out[i] = cams[ord[i]];
}

std::array<Vec3, 6> optical_axes(const RigConfig& rig) {
  std::array<Vec3, 6> axes;
  for (int i = 0; i < 6; ++i) axes[i] = rig.cameras[i].pose.rotation.col(2);
  return axes;
}

}  // namespace

MappingTable::Entry MappingTable::entry(int d, int h, int w) const {
  const size_t e = index(d, h, w);
  Entry out;
  out.valid = valid[e] != 0;
  if (!out.valid) return out;
  out.camera = cam_index[e];
  out.src_x = src_x[e];
  out.src_y = src_y[e];
  const double fx = out.src_x - std::floor(out.src_x);
  const double fy = out.src_y - std::floor(out.src_y);
  out.w00 = (1 - fx) * (1 - fy);
  out.w10 = fx * (1 - fy);
  out.w01 = (1 - fx) * fy;
  out.w11 = fx * fy;
  return out;
}

MappingTable build_table_camera(const RigConfig& rig, int cam, const SphereGrid& grid,
                                const DepthHypotheses& hyp, int stride, int threads) {
  if (cam < 0 || cam >= 6) throw std::invalid_argument("build_table_camera: camera index");
  MappingTable t;
  init_table(t, rig, grid, hyp, stride);
  t.group_id = rig.group_of_camera(cam);
  t.source_camera = cam;

  const FisheyeCamera& fc = rig.cameras[cam];
  const CamCtx ctx = make_ctx(fc, stride, t.feat_width[cam], t.feat_height[cam]);
  const int H = t.height, W = t.width, D = t.depths;
  std::atomic<uint64_t> valid_total{0};

  parallel_chunks(0, H, threads, [&](int h0, int h1) {
    std::vector<Vec3> a_row(W);
    uint64_t local = 0;
    for (int h = h0; h < h1; ++h) {
      for (int w = 0; w < W; ++w) a_row[w] = ctx.rot_t * grid.dir(h, w);
      for (int d = 0; d < D; ++d) {
        const double lambda = hyp.depths[d];
        const size_t base = (size_t(d) * H + h) * W;
        for (int w = 0; w < W; ++w) {
          double xf, yf;
          if (project_entry(fc, ctx, lambda, a_row[w], xf, yf)) {
            t.src_x[base + w] = xf;
            t.src_y[base + w] = yf;
            t.cam_index[base + w] = uint8_t(cam);
            t.valid[base + w] = 1;
            ++local;
          } else {
            t.cam_index[base + w] = uint8_t(cam);
          }
        }
      }
    }
    valid_total += local;
  });
  t.valid_count = valid_total.load();
  return t;
}

StitchPlan build_stitch_plan(const RigConfig& rig, const SphereGrid& grid,
                             const DepthHypotheses& hyp, int stride, int threads) {
  StitchPlan plan;
  plan.depths = int(hyp.count());
  plan.height = grid.height;
  plan.width = grid.width;
  const size_t n = size_t(plan.depths) * plan.height * plan.width;
  for (int g = 0; g < 2; ++g) plan.winner[g].assign(n, StitchPlan::kNone);

  const std::array<Vec3, 6> axes = optical_axes(rig);
  std::array<CamCtx, 6> ctx;
  for (int cam = 0; cam < 6; ++cam)
    ctx[cam] = make_ctx(rig.cameras[cam], stride,
                        feat_dim(rig.cameras[cam].width, stride),
                        feat_dim(rig.cameras[cam].height, stride));
  const int H = plan.height, W = plan.width, D = plan.depths;

  parallel_chunks(0, H, threads, [&](int64_t h0, int64_t h1) {
    std::vector<std::array<Vec3, 6>> a_row(W);
    std::vector<std::array<int, 6>> pref_row(W);  // [0..2]=group 0, [3..5]=group 1
    for (int h = int(h0); h < h1; ++h) {
      for (int w = 0; w < W; ++w) {
        const Vec3 dir = grid.dir(h, w);
        for (int cam = 0; cam < 6; ++cam) a_row[w][cam] = ctx[cam].rot_t * dir;
        rank_cameras(axes, rig.groups[0], dir, pref_row[w].data());
        rank_cameras(axes, rig.groups[1], dir, pref_row[w].data() + 3);
      }
      for (int d = 0; d < D; ++d) {
        const double lambda = hyp.depths[d];
        const size_t base = (size_t(d) * H + h) * W;
        for (int w = 0; w < W; ++w) {
          for (int g = 0; g < 2; ++g) {
            for (int i = 0; i < 3; ++i) {
              const int cam = pref_row[w][g * 3 + i];
              double xf, yf;
              if (project_entry(rig.cameras[cam], ctx[cam], lambda, a_row[w][cam], xf, yf)) {
                plan.winner[g][base + w] = uint8_t(cam);
                break;
              }
            }
          }
        }
      }
    }
  });
  return plan;
}

ConventionalTables build_table_conventional(const RigConfig& rig, const SphereGrid& grid,
                                            const DepthHypotheses& hyp, int stride, int threads) {
  ConventionalTables out;
  for (int cam = 0; cam < 6; ++cam)
    out.tables[cam] = build_table_camera(rig, cam, grid, hyp, stride, threads);
  out.plan = build_stitch_plan(rig, grid, hyp, stride, threads);
  return out;
}

std::array<MappingTable, 2> build_table_combined(const RigConfig& rig, const SphereGrid& grid,
                                                 const DepthHypotheses& hyp, int stride,
                                                 int threads) {
  std::array<MappingTable, 2> out;
  const std::array<Vec3, 6> axes = optical_axes(rig);

  for (int g = 0; g < 2; ++g) {
    MappingTable& t = out[g];
    init_table(t, rig, grid, hyp, stride);
    t.group_id = g;
    t.source_camera = -1;

    std::array<CamCtx, 3> ctx;
    for (int i = 0; i < 3; ++i) {
      const int cam = rig.groups[g][i];
      ctx[i] = make_ctx(rig.cameras[cam], stride, t.feat_width[cam], t.feat_height[cam]);
    }
    const int H = t.height, W = t.width, D = t.depths;
    std::atomic<uint64_t> valid_total{0};

    parallel_chunks(0, H, threads, [&](int h0, int h1) {
      std::vector<std::array<Vec3, 3>> a_row(W);
      std::vector<std::array<int, 3>> pref_row(W);
      uint64_t local = 0;
      for (int h = h0; h < h1; ++h) {
        for (int w = 0; w < W; ++w) {
          const Vec3 dir = grid.dir(h, w);
          for (int i = 0; i < 3; ++i) a_row[w][i] = ctx[i].rot_t * dir;
          rank_cameras(axes, rig.groups[g], dir, pref_row[w].data());
        }
        for (int d = 0; d < D; ++d) {
          const double lambda = hyp.depths[d];
          const size_t base = (size_t(d) * H + h) * W;
          for (int w = 0; w < W; ++w) {
            for (int r = 0; r < 3; ++r) {
              const int cam = pref_row[w][r];
              // slot of `cam` within the ascending group triple
              int slot = 0;
              while (rig.groups[g][slot] != cam) ++slot;
              double xf, yf;
              if (project_entry(rig.cameras[cam], ctx[slot], lambda, a_row[w][slot], xf, yf)) {
                t.src_x[base + w] = xf;
                t.src_y[base + w] = yf;
                t.cam_index[base + w] = uint8_t(cam);
                t.valid[base + w] = 1;
                ++local;
                break;
              }
            }
          }
        }
      }
      valid_total += local;
    });
    t.valid_count = valid_total.load();
  }
  return out;
}

FeatureSphere warp_features(std::span<const FeatureMap> per_camera, const MappingTable& table,
                            int threads, WarpStats* stats) {
  if (per_camera.size() != 6)
    throw std::invalid_argument("warp_features: expected 6 per-camera feature maps");
  const int channels = per_camera[0].channels;
  for (int i = 0; i < 6; ++i) {
    const FeatureMap& fm = per_camera[i];
    if (fm.channels != channels)
      throw std::invalid_argument("warp_features: camera " + std::to_string(i) +
                                  ": channel count differs across cameras");
    if (fm.width != table.feat_width[i] || fm.height != table.feat_height[i])
      throw std::invalid_argument(
          "warp_features: camera " + std::to_string(i) + ": feature map is " +
          std::to_string(fm.width) + "x" + std::to_string(fm.height) + ", table expects " +
          std::to_string(table.feat_width[i]) + "x" + std::to_string(table.feat_height[i]));
  }

  FeatureSphere out;
  out.channels = channels;
  out.depths = table.depths;
  out.height = table.height;
  out.width = table.width;
  const size_t n = size_t(out.depths) * out.height * out.width;
  out.data.assign(n * channels, 0.0f);
  out.valid.assign(n, 0);

  const int W = table.width;
  const int rows = table.depths * table.height;
  std::atomic<uint64_t> gathers{0};

  parallel_chunks(0, rows, threads, [&](int r0, int r1) {
    uint64_t local = 0;
    for (int r = r0; r < r1; ++r) {
      const size_t base = size_t(r) * W;
      for (int w = 0; w < W; ++w) {
        const size_t e = base + w;
        if (!table.valid[e]) continue;
        const FeatureMap& fm = per_camera[table.cam_index[e]];
        const double x = table.src_x[e];
        const double y = table.src_y[e];
        const int x0 = int(x), y0 = int(y);
        const int x1 = std::min(x0 + 1, fm.width - 1);
        const int y1 = std::min(y0 + 1, fm.height - 1);
        const double fx = x - x0, fy = y - y0;
        const double w00 = (1 - fx) * (1 - fy);
        const double w10 = fx * (1 - fy);
        const double w01 = (1 - fx) * fy;
        const double w11 = fx * fy;
        const float* p00 = fm.at(y0, x0);
        const float* p10 = fm.at(y0, x1);
        const float* p01 = fm.at(y1, x0);
        const float* p11 = fm.at(y1, x1);
        float* o = &out.data[e * channels];
        for (int c = 0; c < channels; ++c)
          o[c] = float(w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c]);
        out.valid[e] = 1;
        ++local;
      }
    }
    gathers += local;
  });

  if (stats) {
    stats->budgeted_ops += table.op_count();
    stats->valid_gathers += gathers.load();
  }
  return out;
}

FeatureSphere stitch_spheres(const std::array<FeatureSphere, 6>& spheres, const StitchPlan& plan,
                             int group, int threads) {
  if (group < 0 || group > 1) throw std::invalid_argument("stitch_spheres: group must be 0 or 1");
  const int channels = spheres[0].channels;
  for (const FeatureSphere& s : spheres)
    if (s.channels != channels || s.depths != plan.depths || s.height != plan.height ||
        s.width != plan.width)
      throw std::invalid_argument("stitch_spheres: sphere dims do not match the plan");

  FeatureSphere out;
  out.channels = channels;
  out.depths = plan.depths;
  out.height = plan.height;
  out.width = plan.width;
  const size_t n = size_t(plan.depths) * plan.height * plan.width;
  out.data.assign(n * channels, 0.0f);
  out.valid.assign(n, 0);

  parallel_chunks(size_t(0), n, threads, [&](size_t e0, size_t e1) {
    for (size_t e = e0; e < e1; ++e) {
      const uint8_t wn = plan.winner[group][e];
      if (wn == StitchPlan::kNone) continue;
      const FeatureSphere& s = spheres[wn];
      std::copy_n(&s.data[e * channels], channels, &out.data[e * channels]);
      out.valid[e] = s.valid[e];
    }
  });
  return out;
}

void stitch_accumulate(FeatureSphere& dst, const FeatureSphere& src, const StitchPlan& plan,
                       int group, int cam, int threads) {
  if (group < 0 || group > 1) throw std::invalid_argument("stitch_accumulate: group must be 0 or 1");
  if (src.depths != plan.depths || src.height != plan.height || src.width != plan.width)
    throw std::invalid_argument("stitch_accumulate: sphere dims do not match the plan");
  const int channels = src.channels;
  const size_t n = size_t(plan.depths) * plan.height * plan.width;
  if (dst.valid.empty()) {
    dst.channels = channels;
    dst.depths = plan.depths;
    dst.height = plan.height;
    dst.width = plan.width;
    dst.data.assign(n * channels, 0.0f);
    dst.valid.assign(n, 0);
  } else if (dst.channels != channels || dst.depths != plan.depths || dst.height != plan.height ||
             dst.width != plan.width) {
    throw std::invalid_argument("stitch_accumulate: destination dims do not match the plan");
  }
  parallel_chunks(size_t(0), n, threads, [&](size_t e0, size_t e1) {
    for (size_t e = e0; e < e1; ++e) {
      if (plan.winner[group][e] != cam) continue;
      std::copy_n(&src.data[e * channels], channels, &dst.data[e * channels]);
      dst.valid[e] = src.valid[e];
    }
  });
}

std::array<FeatureSphere, 2> conventional_sweep(std::span<const FeatureMap> per_camera,
                                                const ConventionalTables& tabs, int threads,
                                                WarpStats* stats) {
  std::array<FeatureSphere, 2> out;
  // One camera in flight at a time keeps the peak at three sphere volumes.
  for (int cam = 0; cam < 6; ++cam) {
    const FeatureSphere sphere = warp_features(per_camera, tabs.tables[cam], threads, stats);
    stitch_accumulate(out[tabs.tables[cam].group_id], sphere, tabs.plan,
                      tabs.tables[cam].group_id, cam, threads);
  }
  return out;
}

FeatureSphere rotate_sphere_columns(const FeatureSphere& s, int k) {
  FeatureSphere out;
  out.channels = s.channels;
  out.depths = s.depths;
  out.height = s.height;
  out.width = s.width;
  const size_t rows = size_t(s.depths) * s.height;
  out.data = rotate_columns(s.data, rows, s.width, s.channels, k);
  out.valid = rotate_columns(s.valid, rows, s.width, 1, k);
  return out;
}

}  // namespace omnisweep

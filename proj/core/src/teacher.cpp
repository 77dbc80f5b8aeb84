#include "omnisweep/teacher.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "omnisweep/parallel.hpp"

namespace omnisweep {

double VirtualPinhole::fx() const { return width / (2.0 * std::tan(deg_to_rad(hfov_deg) / 2)); }
double VirtualPinhole::fy() const { return height / (2.0 * std::tan(deg_to_rad(vfov_deg) / 2)); }

bool cameras_adjacent(int cam_i, int cam_j) {
  if (cam_i < 0 || cam_i > 5 || cam_j < 0 || cam_j > 5) return false;
  const int d = (cam_i - cam_j + 6) % 6;
  return d == 1 || d == 5;
}

std::vector<std::pair<int, int>> adjacent_pairs() {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < 6; ++i) out.emplace_back(i, (i + 1) % 6);
  return out;
}

StereoPair rectify_pair(const RigConfig& rig, std::span<const ImageF> images, int cam_i,
                        int cam_j, const PinholeSpec& spec, int threads) {
  if (!cameras_adjacent(cam_i, cam_j))
    throw std::invalid_argument("rectify_pair: cameras " + std::to_string(cam_i) + " and " +
                                std::to_string(cam_j) + " are not adjacent");
  if (images.size() != 6) throw std::invalid_argument("rectify_pair: expected 6 fisheye images");
  for (int c : {cam_i, cam_j})
    if (images[c].width != rig.cameras[c].width || images[c].height != rig.cameras[c].height)
      throw std::invalid_argument("rectify_pair: image " + std::to_string(c) +
                                  " does not match the rig camera dimensions");

  const Vec3 ci = rig.cameras[cam_i].pose.translation;
  const Vec3 cj = rig.cameras[cam_j].pose.translation;
  const double baseline = (cj - ci).norm();
  if (baseline <= 0) throw std::invalid_argument("rectify_pair: coincident optical centers");

  const Vec3 x_axis = (cj - ci) / baseline;
  const Vec3 bisector =
      rig.cameras[cam_i].pose.rotation.col(2) + rig.cameras[cam_j].pose.rotation.col(2);
  Vec3 z_axis = bisector - bisector.dot(x_axis) * x_axis;
  if (z_axis.norm() < 1e-12)
    throw std::invalid_argument("rectify_pair: optical axes parallel to the baseline");
  z_axis.normalize();
  const Vec3 y_axis = z_axis.cross(x_axis);

  Mat3 rot;
  rot.col(0) = x_axis;
  rot.col(1) = y_axis;
  rot.col(2) = z_axis;

  StereoPair pair;
  pair.baseline = baseline;
  pair.cam_left = cam_i;
  pair.cam_right = cam_j;
  pair.pair_yaw_deg = rad_to_deg(std::atan2(z_axis.y(), z_axis.x()));

  VirtualPinhole vp;
  vp.width = spec.width;
  vp.height = spec.height;
  vp.hfov_deg = spec.hfov_deg;
  vp.vfov_deg = spec.vfov_deg;
  vp.pose.rotation = rot;
  vp.pose.translation = ci;
  pair.pinhole_left = vp;
  vp.pose.translation = cj;
  pair.pinhole_right = vp;
  pair.focal = vp.fx();

  // Rotation-only resample (pinhole shares the fisheye's optical center):
  // pinhole ray -> rig -> fisheye camera frame -> fisheye pixel.
  auto resample = [&](int cam_idx) {
    const FisheyeCamera& cam = rig.cameras[cam_idx];
    const ImageF& src = images[cam_idx];
    const Mat3 to_cam = cam.pose.rotation.transpose() * rot;
    const FisheyeCamera::FovLimits lim = cam.fov_limits();
    ImageF out(vp.width, vp.height);
    const double fx = vp.fx(), fy = vp.fy(), cx = vp.cx(), cy = vp.cy();
    parallel_chunks(0, vp.height, threads, [&](int64_t v0, int64_t v1) {
      for (int v = int(v0); v < v1; ++v) {
        for (int u = 0; u < vp.width; ++u) {
          const Vec3 dir_pin((u - cx) / fx, (v - cy) / fy, 1.0);
          const Vec3 dir_cam = to_cam * dir_pin;
          const ProjectResult pr = project(cam, dir_cam, lim);
          out.at(v, u) = pr.valid ? float(sample_bilinear(src, pr.pixel.x(), pr.pixel.y())) : 0.0f;
        }
      }
    });
    return out;
  };
  pair.left = resample(cam_i);
  pair.right = resample(cam_j);
  return pair;
}

namespace {

// Inclusive-window sums via a summed-area table; valid where the full
// patch fits inside the image.
struct Integral {
  int width = 0, height = 0;
  std::vector<double> table;  // (height+1) x (width+1)

  void build(const ImageF& img, bool squared) {
    width = img.width;
    height = img.height;
    table.assign(size_t(width + 1) * (height + 1), 0.0);
    for (int y = 0; y < height; ++y) {
      double row = 0;
      for (int x = 0; x < width; ++x) {
        const double v = img.at(y, x);
        row += squared ? v * v : v;
        table[size_t(y + 1) * (width + 1) + (x + 1)] =
            row + table[size_t(y) * (width + 1) + (x + 1)];
      }
    }
  }

  // Sum over the (2r+1)^2 window centered at (y, x).
  double window(int y, int x, int r) const {
    const int x0 = x - r, y0 = y - r, x1 = x + r + 1, y1 = y + r + 1;
    const size_t w1 = width + 1;
    return table[size_t(y1) * w1 + x1] - table[size_t(y0) * w1 + x1] -
           table[size_t(y1) * w1 + x0] + table[size_t(y0) * w1 + x0];
  }
};

struct MatchBuffers {
  std::vector<float> best_s, s_before, s_after, last_s;
  std::vector<int16_t> best_d;

  void init(size_t n) {
    best_s.assign(n, -2.0f);
    s_before.assign(n, -2.0f);
    s_after.assign(n, -2.0f);
    last_s.assign(n, -2.0f);
    best_d.assign(n, -1);
  }
};

constexpr double kVarEps = 1e-4;  // patch variance floor, [0,1] intensities

// NCC winner-take-all along rows. `flip` false matches base(y,x) against
// other(y,x-d) (left-referenced); true matches base(y,x) against
// other(y,x+d) (right-referenced). `score` receives the winning NCC value
// (-2 where no candidate was evaluated).
void match_direction(const ImageF& base, const ImageF& other, int max_disp, int patch, bool flip,
                     MatchBuffers& buf, ImageF& disparity, ImageF& score) {
  const int W = base.width, H = base.height, r = patch / 2;
  const double n = double(patch) * patch;
  const size_t total = size_t(W) * H;
  buf.init(total);

  Integral base_sum, base_sq, other_sum, other_sq;
  base_sum.build(base, false);
  base_sq.build(base, true);
  other_sum.build(other, false);
  other_sq.build(other, true);

  ImageF product(W, H);
  Integral prod_sum;

  for (int d = 0; d <= max_disp; ++d) {
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const int ox = flip ? x + d : x - d;
        product.at(y, x) = (ox >= 0 && ox < W) ? base.at(y, x) * other.at(y, ox) : 0.0f;
      }
    prod_sum.build(product, false);

    for (int y = r; y < H - r; ++y) {
      for (int x = r; x < W - r; ++x) {
        const int ox = flip ? x + d : x - d;
        if (ox - r < 0 || ox + r >= W) continue;
        const double sb = base_sum.window(y, x, r);
        const double vb = base_sq.window(y, x, r) - sb * sb / n;
        if (vb < n * kVarEps) continue;
        const double so = other_sum.window(y, ox, r);
        const double vo = other_sq.window(y, ox, r) - so * so / n;
        if (vo < n * kVarEps) continue;
        const double cov = prod_sum.window(y, x, r) - sb * so / n;
        const float score = float(cov / std::sqrt(vb * vo));

        const size_t i = size_t(y) * W + x;
        if (d == buf.best_d[i] + 1) buf.s_after[i] = score;
        if (score > buf.best_s[i]) {
          buf.best_s[i] = score;
          buf.best_d[i] = int16_t(d);
          buf.s_before[i] = buf.last_s[i];
          buf.s_after[i] = -2.0f;
        }
        buf.last_s[i] = score;
      }
    }
  }

  disparity = ImageF(W, H, -1.0f);
  score = ImageF(W, H, -2.0f);
  for (size_t i = 0; i < total; ++i) {
    const int d = buf.best_d[i];
    if (d < 0) continue;
    score.data[i] = buf.best_s[i];
    double refined = d;
    if (d > 0 && d < max_disp && buf.s_before[i] > -2.0f && buf.s_after[i] > -2.0f) {
      const double sm = buf.s_before[i], s0 = buf.best_s[i], sp = buf.s_after[i];
      const double denom = sm - 2 * s0 + sp;
      if (denom < -1e-12) {
        const double delta = 0.5 * (sm - sp) / denom;
        refined = d + std::clamp(delta, -0.5, 0.5);
      }
    }
    disparity.data[i] = float(refined);
  }
}

// 3x3 median over surviving disparities to knock down matching noise. Already
// rejected pixels stay rejected; a pixel is only smoothed when most of its
// neighbourhood survived, so silhouettes are not dragged across holes.
ImageF median_filter_valid(const ImageF& disp) {
  const int W = disp.width, H = disp.height;
  ImageF out = disp;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (disp.at(y, x) < 0) continue;
      float vals[9];
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
          const float v = disp.at(yy, xx);
          if (v >= 0) vals[n++] = v;
        }
      }
      if (n < 5) continue;
      std::nth_element(vals, vals + n / 2, vals + n);
      out.at(y, x) = vals[n / 2];
    }
  }
  return out;
}

}  // namespace

BlockMatchMaps block_match_full(const StereoPair& pair, int max_disp, int patch, int threads) {
  if (max_disp < 1) throw std::invalid_argument("block_match: max_disp must be >= 1");
  if (patch < 3 || patch % 2 == 0)
    throw std::invalid_argument("block_match: patch size must be odd and >= 3");
  if (!pair.left.same_size(pair.right))
    throw std::invalid_argument("block_match: rectified images differ in size");
  (void)threads;  // the two directions run serially; callers parallelize over pairs

  MatchBuffers buf;
  ImageF disp_l, disp_r, score_l, score_r;
  match_direction(pair.left, pair.right, max_disp, patch, false, buf, disp_l, score_l);
  match_direction(pair.right, pair.left, max_disp, patch, true, buf, disp_r, score_r);

  // Left-right consistency, both directions against the raw partner map: a
  // match survives when the partner pixel points back within 1 px. The cross
  // check is the verification; no score floor, so consistent low-correlation
  // locks (grazing surfaces) still count.
  const int W = disp_l.width, H = disp_l.height;
  BlockMatchMaps maps;
  maps.left = disp_l;
  maps.right = disp_r;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const float dl = disp_l.at(y, x);
      if (dl >= 0) {
        const int xr = x - int(std::lround(dl));
        if (xr < 0 || xr >= W || disp_r.at(y, xr) < 0 ||
            std::abs(dl - disp_r.at(y, xr)) > 1.0f)
          maps.left.at(y, x) = -1.0f;
      }
      const float dr = disp_r.at(y, x);
      if (dr >= 0) {
        const int xl = x + int(std::lround(dr));
        if (xl < 0 || xl >= W || disp_l.at(y, xl) < 0 ||
            std::abs(dr - disp_l.at(y, xl)) > 1.0f)
          maps.right.at(y, x) = -1.0f;
      }
    }
  }

  maps.left_all = disp_l;
  maps.right_all = disp_r;
  maps.left = median_filter_valid(maps.left);
  maps.right = median_filter_valid(maps.right);
  maps.left_all = median_filter_valid(maps.left_all);
  maps.right_all = median_filter_valid(maps.right_all);
  return maps;
}

ImageF block_match(const StereoPair& pair, int max_disp, int patch, int threads,
                   ImageF* right_disparity) {
  BlockMatchMaps maps = block_match_full(pair, max_disp, patch, threads);
  if (right_disparity) *right_disparity = std::move(maps.right);
  return std::move(maps.left);
}

PanoramaLabel fuse_views(const std::vector<FusionView>& fusion_views, const RigConfig& rig,
                         const SphereGrid& grid, int row_begin, int row_end, int threads,
                         int footprint) {
  if (fusion_views.empty()) throw std::invalid_argument("fuse_views: no views");
  if (footprint < 0) throw std::invalid_argument("fuse_views: footprint must be >= 0");
  if (row_begin < 0 || row_end > grid.height || row_begin >= row_end)
    throw std::invalid_argument("fuse_views: crop rows out of range");

  const int W = grid.width;
  const int Hc = row_end - row_begin;
  const size_t n = size_t(W) * Hc;
  const int views = int(fusion_views.size());

  for (int v = 0; v < views; ++v) {
    const FusionView& fv = fusion_views[v];
    if (!fv.disparity || !fv.pinhole)
      throw std::invalid_argument("fuse_views: view " + std::to_string(v) + " incomplete");
    if (fv.disparity->width != fv.pinhole->width || fv.disparity->height != fv.pinhole->height)
      throw std::invalid_argument("fuse_views: disparity " + std::to_string(v) +
                                  " dims do not match the pinhole");
  }

  // Per-view candidate over the band: every disparity pixel back-projects to
  // a rig-frame point and lands in the ERP cell nearest its direction; the
  // view's candidate per cell is the median of its samples there, which
  // shrugs off lone mismatches that slip through the left-right check.
  std::vector<std::vector<float>> view_depth(views);

  parallel_chunks(0, views, threads, [&](int64_t v0, int64_t v1) {
    for (int v = int(v0); v < v1; ++v) {
      std::vector<std::vector<float>> samples(n);
      const FusionView& fv = fusion_views[v];
      const ImageF& disp = *fv.disparity;
      const VirtualPinhole& vp = *fv.pinhole;
      const double fx = vp.fx(), fy = vp.fy(), cx = vp.cx(), cy = vp.cy();
      for (int py = 0; py < disp.height; ++py) {
        for (int px = 0; px < disp.width; ++px) {
          const float d = disp.at(py, px);
          if (d <= 0) continue;
          double z = fv.focal * fv.baseline / d;
          z = std::clamp(z, 1e-3, 1e6);
          const Vec3 local((px - cx) / fx * z, (py - cy) / fy * z, z);
          const Vec3 point = vp.pose.apply(local);
          const double dist =
              std::clamp(point.norm(), rig.min_depth, rig.max_depth);

          // ERP coordinates of the point's direction from the rig origin.
          const double azim = std::atan2(point.y(), point.x());
          const double polar = std::acos(std::clamp(point.z() / point.norm(), -1.0, 1.0));
          const double col = (azim + kPi) * W / (2 * kPi);
          const double row = polar * grid.height / kPi - row_begin;

          // Deposit into the nearest cell (footprint 0): spreading mixes
          // foreground and background around silhouettes. Grid directions
          // sit at integer coordinates, so nearest = round.
          const int rc = int(std::lround(row));
          const int cc = int(std::lround(col));
          for (int rr = rc - footprint; rr <= rc + footprint; ++rr) {
            if (rr < 0 || rr >= Hc) continue;
            for (int ci = cc - footprint; ci <= cc + footprint; ++ci) {
              const int cw = ((ci % W) + W) % W;
              samples[size_t(rr) * W + cw].push_back(float(dist));
            }
          }
        }
      }
      view_depth[v].assign(n, 0.0f);
      for (size_t i = 0; i < n; ++i) {
        std::vector<float>& s = samples[i];
        if (s.empty()) continue;
        const size_t mid = (s.size() - 1) / 2;
        std::nth_element(s.begin(), s.begin() + mid, s.end());
        float med = s[mid];
        if (s.size() % 2 == 0) {
          std::nth_element(s.begin() + mid + 1, s.begin() + mid + 1, s.end());
          med = 0.5f * (med + s[mid + 1]);
        }
        view_depth[v][i] = med;
      }
    }
  });

  PanoramaLabel label;
  label.depth.width = W;
  label.depth.height = Hc;
  label.depth.row_begin = row_begin;
  label.depth.depth.assign(n, 0.0f);
  label.depth.confidence.assign(n, 0.0f);
  label.support.assign(n, 0);
  label.source_yaw.assign(n, 0.0f);

  parallel_chunks(int64_t(0), int64_t(n), threads, [&](int64_t i0, int64_t i1) {
    std::vector<std::pair<float, int>> cands;
    for (int64_t i = i0; i < i1; ++i) {
      cands.clear();
      for (int v = 0; v < views; ++v) {
        const float d = view_depth[v][i];
        if (d > 0) cands.emplace_back(d, v);
      }
      if (cands.empty()) continue;
      std::sort(cands.begin(), cands.end());
      const size_t m = cands.size();
      const auto& lower_mid = cands[(m - 1) / 2];
      const float fused =
          (m % 2 == 1) ? lower_mid.first : 0.5f * (lower_mid.first + cands[m / 2].first);
      label.depth.depth[i] = fused;
      label.depth.confidence[i] = float(m) / float(views);
      label.support[i] = uint8_t(m);
      label.source_yaw[i] = float(fusion_views[lower_mid.second].pair_yaw_deg);
    }
  });
  return label;
}

PanoramaLabel fuse_panorama(const std::vector<ImageF>& disparities,
                            const std::vector<StereoPair>& pairs, const RigConfig& rig,
                            const SphereGrid& grid, int row_begin, int row_end, int threads) {
  if (disparities.size() != pairs.size())
    throw std::invalid_argument("fuse_panorama: one disparity map per pair required");
  std::vector<FusionView> views(pairs.size());
  for (size_t v = 0; v < pairs.size(); ++v)
    views[v] = {&disparities[v], &pairs[v].pinhole_left, pairs[v].baseline, pairs[v].focal,
                pairs[v].pair_yaw_deg};
  return fuse_views(views, rig, grid, row_begin, row_end, threads);
}

PanoramaLabel fuse_with_rescue(const std::vector<FusionView>& verified,
                               const std::vector<FusionView>& unverified, const RigConfig& rig,
                               const SphereGrid& grid, int row_begin, int row_end, int threads) {
  PanoramaLabel label = fuse_views(verified, rig, grid, row_begin, row_end, threads);
  if (unverified.empty()) return label;

  const auto holes = [&label] {
    size_t k = 0;
    for (uint8_t s : label.support) k += s == 0;
    return k;
  };

  float scale = 0.25f;
  for (int footprint = 0; holes() > 0 && footprint <= 8; ++footprint, scale *= 0.25f) {
    const PanoramaLabel fallback =
        fuse_views(unverified, rig, grid, row_begin, row_end, threads, footprint);
    for (size_t i = 0; i < label.support.size(); ++i) {
      if (label.support[i] > 0 || fallback.support[i] == 0) continue;
      label.depth.depth[i] = fallback.depth.depth[i];
      label.depth.confidence[i] = scale * fallback.depth.confidence[i];
      label.support[i] = fallback.support[i];
      label.source_yaw[i] = fallback.source_yaw[i];
    }
  }
  return label;
}

PanoramaLabel teacher_pseudo_label(const RigConfig& rig, std::span<const ImageF> images,
                                   const SphereGrid& grid, int row_begin, int row_end,
                                   const PinholeSpec& spec, int max_disp, int patch,
                                   int threads) {
  std::vector<StereoPair> pairs;
  std::vector<BlockMatchMaps> maps(6);
  for (const auto& [i, j] : adjacent_pairs()) {
    pairs.push_back(rectify_pair(rig, images, i, j, spec, threads));
    maps[pairs.size() - 1] = block_match_full(pairs.back(), max_disp, patch, threads);
  }
  std::vector<FusionView> verified, unverified;
  for (size_t v = 0; v < pairs.size(); ++v) {
    const StereoPair& p = pairs[v];
    verified.push_back({&maps[v].left, &p.pinhole_left, p.baseline, p.focal, p.pair_yaw_deg});
    verified.push_back({&maps[v].right, &p.pinhole_right, p.baseline, p.focal, p.pair_yaw_deg});
    unverified.push_back(
        {&maps[v].left_all, &p.pinhole_left, p.baseline, p.focal, p.pair_yaw_deg});
    unverified.push_back(
        {&maps[v].right_all, &p.pinhole_right, p.baseline, p.focal, p.pair_yaw_deg});
  }
  return fuse_with_rescue(verified, unverified, rig, grid, row_begin, row_end, threads);
}

}  // namespace omnisweep

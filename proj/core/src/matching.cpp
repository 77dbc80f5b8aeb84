#include "omnisweep/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "omnisweep/parallel.hpp"
#include "omnisweep/rng.hpp"

namespace omnisweep {

DescriptorMap extract_descriptors(const ImageF& image, int patch, int stride, double eps_tex,
                                  int threads) {
  if (patch < 3 || patch % 2 == 0)
    throw std::invalid_argument("extract_descriptors: patch size must be odd and >= 3");
  if (stride < 1) throw std::invalid_argument("extract_descriptors: stride must be >= 1");
  if (image.width < patch || image.height < patch)
    throw std::invalid_argument("extract_descriptors: image smaller than the patch");
  for (float v : image.data)
    if (!std::isfinite(v)) throw std::invalid_argument("extract_descriptors: image must be finite");

  DescriptorMap out;
  out.width = (image.width + stride - 1) / stride;
  out.height = (image.height + stride - 1) / stride;
  out.channels = patch * patch;
  out.stride = stride;
  out.data.assign(size_t(out.width) * out.height * out.channels, 0.0f);

  const int r = patch / 2;
  const int C = out.channels;

  parallel_chunks(0, out.height, threads, [&](int64_t fy0, int64_t fy1) {
    std::vector<double> vals(C);
    for (int fy = int(fy0); fy < fy1; ++fy) {
      const int iy = fy * stride;
      for (int fx = 0; fx < out.width; ++fx) {
        const int ix = fx * stride;
        double sum = 0;
        int k = 0;
        for (int dy = -r; dy <= r; ++dy) {
          const int sy = std::clamp(iy + dy, 0, image.height - 1);
          for (int dx = -r; dx <= r; ++dx) {
            const int sx = std::clamp(ix + dx, 0, image.width - 1);
            const double v = image.at(sy, sx);
            vals[k++] = v;
            sum += v;
          }
        }
        const double mean = sum / C;
        double ss = 0;
        for (int i = 0; i < C; ++i) {
          const double d = vals[i] - mean;
          ss += d * d;
        }
        if (ss / C < eps_tex) continue;  // textureless: leave the zero vector
        const double inv_norm = 1.0 / std::sqrt(ss);
        float* dst = out.at(fy, fx);
        for (int i = 0; i < C; ++i) dst[i] = float((vals[i] - mean) * inv_norm);
      }
    }
  });
  return out;
}

CostVolume compute_cost(const FeatureSphere& a, const FeatureSphere& b, int threads) {
  if (a.channels != b.channels || a.depths != b.depths || a.height != b.height ||
      a.width != b.width)
    throw std::invalid_argument("compute_cost: sphere shapes differ");

  CostVolume vol;
  vol.depths = a.depths;
  vol.height = a.height;
  vol.width = a.width;
  const size_t n = size_t(vol.depths) * vol.height * vol.width;
  vol.scores.assign(n, 0.0f);
  vol.valid.assign(n, 0);

  const int C = a.channels;
  constexpr double kNormEps2 = 1e-12;  // squared norm threshold (norm < 1e-6)

  parallel_chunks(int64_t(0), int64_t(n), threads, [&](int64_t e0, int64_t e1) {
    for (int64_t e = e0; e < e1; ++e) {
      if (!a.valid[e] || !b.valid[e]) continue;
      vol.valid[e] = 1;
      const float* pa = &a.data[size_t(e) * C];
      const float* pb = &b.data[size_t(e) * C];
      double dot = 0, na = 0, nb = 0;
      for (int c = 0; c < C; ++c) {
        dot += double(pa[c]) * pb[c];
        na += double(pa[c]) * pa[c];
        nb += double(pb[c]) * pb[c];
      }
      if (na < kNormEps2 || nb < kNormEps2) continue;
      vol.scores[e] = float(dot / std::sqrt(na * nb));
    }
  });
  return vol;
}

namespace {

// (2r+1)^2 box average: horizontal pass wraps across the azimuth seam,
// vertical pass truncates at the poles and normalizes by the sample count.
// Windows are summed per output cell in source order (no running sums), so
// integer column rotation commutes with the filter bitwise.
CostVolume box_filter_wrap(const CostVolume& in, int radius, int threads) {
  CostVolume out;
  out.depths = in.depths;
  out.height = in.height;
  out.width = in.width;
  out.valid = in.valid;
  const size_t n = size_t(in.depths) * in.height * in.width;
  out.scores.assign(n, 0.0f);

  const int H = in.height, W = in.width, r = radius;
  const double inv_w = 1.0 / (2 * r + 1);

  parallel_chunks(0, in.depths, threads, [&](int64_t d0, int64_t d1) {
    std::vector<float> tmp(size_t(H) * W);
    for (int d = int(d0); d < d1; ++d) {
      const size_t slice = size_t(d) * H * W;
      for (int h = 0; h < H; ++h) {
        const float* src = &in.scores[slice + size_t(h) * W];
        float* t = &tmp[size_t(h) * W];
        for (int w = 0; w < W; ++w) {
          double s = 0;
          for (int k = -r; k <= r; ++k) {
            int c = (w + k) % W;
            if (c < 0) c += W;
            s += src[c];
          }
          t[w] = float(s * inv_w);
        }
      }
      for (int h = 0; h < H; ++h) {
        const int lo = std::max(0, h - r), hi = std::min(H - 1, h + r);
        float* dst = &out.scores[slice + size_t(h) * W];
        const double inv_cnt = 1.0 / (hi - lo + 1);
        for (int w = 0; w < W; ++w) {
          double s = 0;
          for (int rr = lo; rr <= hi; ++rr) s += tmp[size_t(rr) * W + w];
          dst[w] = float(s * inv_cnt);
        }
      }
    }
  });
  return out;
}

}  // namespace

std::vector<CostVolume> aggregate_cost_stages(const CostVolume& vol, int levels, int radius,
                                              int threads) {
  if (levels < 1) throw std::invalid_argument("aggregate_cost: need levels >= 1");
  if (radius < 1) throw std::invalid_argument("aggregate_cost: need radius >= 1");

  const size_t n = vol.scores.size();
  std::vector<CostVolume> stages;
  stages.reserve(levels);

  CostVolume level = vol;
  std::vector<double> acc(n, 0.0);
  for (int l = 1; l <= levels; ++l) {
    level = box_filter_wrap(level, radius * (1 << (l - 1)), threads);
    for (size_t i = 0; i < n; ++i) acc[i] += level.scores[i];

    CostVolume stage;
    stage.depths = vol.depths;
    stage.height = vol.height;
    stage.width = vol.width;
    stage.valid = vol.valid;
    stage.scores.resize(n);
    const double inv_l = 1.0 / l;
    for (size_t i = 0; i < n; ++i) stage.scores[i] = float(acc[i] * inv_l);
    stages.push_back(std::move(stage));
  }
  return stages;
}

CostVolume aggregate_cost(const CostVolume& vol, int levels, int radius, int threads) {
  std::vector<CostVolume> stages = aggregate_cost_stages(vol, levels, radius, threads);
  return std::move(stages.back());
}

DepthMap read_depth(const CostVolume& vol, const DepthHypotheses& hyp, ReadoutMode mode,
                    double beta, int row_begin, int row_end, int threads) {
  if (vol.depths != hyp.count())
    throw std::invalid_argument("read_depth: volume depth count does not match hypotheses");
  if (row_begin < 0 || row_end > vol.height || row_begin >= row_end)
    throw std::invalid_argument("read_depth: crop rows out of range");
  if (mode == ReadoutMode::kSoft && !(beta > 0))
    throw std::invalid_argument("read_depth: soft mode needs beta > 0");

  DepthMap dm;
  dm.width = vol.width;
  dm.height = row_end - row_begin;
  dm.row_begin = row_begin;
  const size_t n = size_t(dm.width) * dm.height;
  dm.depth.assign(n, 0.0f);
  dm.confidence.assign(n, 0.0f);

  const int D = vol.depths, W = vol.width, H = vol.height;

  parallel_chunks(int64_t(0), int64_t(n), threads, [&](int64_t i0, int64_t i1) {
    for (int64_t i = i0; i < i1; ++i) {
      const int row = row_begin + int(i / W);
      const int col = int(i % W);
      const size_t cell = size_t(row) * W + col;

      int best = -1;
      double best_s = 0;
      for (int d = 0; d < D; ++d) {
        const size_t e = size_t(d) * H * W + cell;
        if (!vol.valid[e]) continue;
        const double s = vol.scores[e];
        if (best < 0 || s > best_s) {
          best = d;
          best_s = s;
        }
      }
      if (best < 0) continue;  // nothing to read; depth stays 0 (invalid)

      if (mode == ReadoutMode::kWta) {
        dm.depth[i] = float(hyp.depths[best]);
        dm.confidence[i] = float(std::clamp(best_s, 0.0, 1.0));
        continue;
      }

      double wsum = 0, inv_acc = 0, wmax = 0;
      int positives = 0, last_pos = -1;
      for (int d = 0; d < D; ++d) {
        const size_t e = size_t(d) * H * W + cell;
        if (!vol.valid[e]) continue;
        const double s = vol.scores[e];
        if (s <= 0) continue;
        const double w = std::pow(s, beta);
        wsum += w;
        inv_acc += w * hyp.inv(d);
        if (w > wmax) wmax = w;
        ++positives;
        last_pos = d;
      }
      if (positives == 0) {  // no positive mass: fall back to wta, zero confidence
        dm.depth[i] = float(hyp.depths[best]);
        continue;
      }
      if (positives == 1) {  // exact one-hot readout
        dm.depth[i] = float(hyp.depths[last_pos]);
        dm.confidence[i] = 1.0f;
        continue;
      }
      dm.depth[i] = float(wsum / inv_acc);
      dm.confidence[i] = float(wmax / wsum);
    }
  });
  return dm;
}

PointCloud depth_to_pointcloud(const DepthMap& depth, const SphereGrid& grid,
                               const ImageF* intensities) {
  if (depth.width != grid.width || depth.row_begin + depth.height > grid.height)
    throw std::invalid_argument("depth_to_pointcloud: depth band does not fit the grid");
  if (intensities && (intensities->width != depth.width || intensities->height != depth.height))
    throw std::invalid_argument("depth_to_pointcloud: intensity image dims differ from depth");

  PointCloud pc;
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const float d = depth.depth[depth.index(r, c)];
      if (d <= 0) continue;
      const Vec3& dir = grid.dir(depth.row_begin + r, c);
      pc.xyz.push_back(float(dir.x() * d));
      pc.xyz.push_back(float(dir.y() * d));
      pc.xyz.push_back(float(dir.z() * d));
      uint8_t g = 128;
      if (intensities) {
        const double v = std::clamp(double(intensities->at(r, c)), 0.0, 1.0);
        g = uint8_t(std::lround(v * 255.0));
      }
      pc.gray.push_back(g);
      pc.distance.push_back(d);
    }
  }
  return pc;
}

ImageF warp_affine(const ImageF& image, double tx, double ty, double angle_deg, double scale) {
  ImageF out(image.width, image.height);
  const double cx = (image.width - 1) / 2.0, cy = (image.height - 1) / 2.0;
  const double a = angle_deg * kPi / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  const double inv_s = 1.0 / scale;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double dx = x - cx - tx, dy = y - cy - ty;
      const double sx = (ca * dx + sa * dy) * inv_s + cx;
      const double sy = (-sa * dx + ca * dy) * inv_s + cy;
      out.at(y, x) = float(sample_bilinear(image, sx, sy));
    }
  }
  return out;
}

ImageF optical_axis_shift(const ImageF& image, double max_shift, uint64_t seed,
                          double max_rot_deg, double max_scale) {
  if (max_shift < 0) throw std::invalid_argument("optical_axis_shift: max_shift must be >= 0");
  Rng rng(seed);
  const double tx = rng.uniform(-max_shift, max_shift);
  const double ty = rng.uniform(-max_shift, max_shift);
  const double ang = rng.uniform(-max_rot_deg, max_rot_deg);
  const double sc = 1.0 + rng.uniform(-max_scale, max_scale);
  return warp_affine(image, tx, ty, ang, sc);
}

CostVolume rotate_cost_columns(const CostVolume& vol, int k) {
  CostVolume out;
  out.depths = vol.depths;
  out.height = vol.height;
  out.width = vol.width;
  const size_t rows = size_t(vol.depths) * vol.height;
  out.scores = rotate_columns(vol.scores, rows, vol.width, 1, k);
  out.valid = rotate_columns(vol.valid, rows, vol.width, 1, k);
  return out;
}

}  // namespace omnisweep

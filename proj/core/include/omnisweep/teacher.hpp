#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "omnisweep/geometry.hpp"
#include "omnisweep/image.hpp"
#include "omnisweep/matching.hpp"
#include "omnisweep/sphere_grid.hpp"

namespace omnisweep {

// Rotation-only virtual pinhole sharing a fisheye camera's optical center.
struct VirtualPinhole {
  int width = 640;
  int height = 640;
  double hfov_deg = 75;
  double vfov_deg = 75;
  RigidPose pose;  // pinhole-to-rig

  double fx() const;
  double fy() const;
  double cx() const { return (width - 1) / 2.0; }
  double cy() const { return (height - 1) / 2.0; }
};

struct PinholeSpec {
  int width = 640;
  int height = 640;
  double hfov_deg = 75;
  double vfov_deg = 75;
};

// Rectified adjacent-camera pair. Both pinholes share one rotation whose
// x axis runs along the baseline from the left camera to the right one and
// whose z axis is the two optical axes' bisector orthogonalized against the
// baseline; epipolar lines are rows by construction.
struct StereoPair {
  ImageF left, right;
  double baseline = 0;      // meters
  double focal = 0;         // pixels (pinhole fx)
  double pair_yaw_deg = 0;  // azimuth of the shared z axis
  int cam_left = -1, cam_right = -1;
  VirtualPinhole pinhole_left, pinhole_right;
};

// Ring neighbors on the hexagon: i and j adjacent iff they differ by 1 mod 6.
bool cameras_adjacent(int cam_i, int cam_j);

// Resamples the two fisheye views into the shared rectified pinholes.
// Pixels outside the fisheye field of view come out black.
StereoPair rectify_pair(const RigConfig& rig, std::span<const ImageF> images, int cam_i,
                        int cam_j, const PinholeSpec& spec = {}, int threads = 1);

// All maps one NCC matching pass produces. Disparity d = x_left - x_right
// everywhere: a left map entry at column x points to right column x - d, a
// right map entry points to left column x + d. Negative values mark pixels
// that are textureless or out of range. `left`/`right` additionally require
// left-right consistency (|d_L - d_R| <= 1), which masks half-occlusions;
// the `_all` maps keep the unverified winners so callers can fall back to
// one-eyed evidence where nothing survives the cross check.
struct BlockMatchMaps {
  ImageF left, right;          // cross-checked
  ImageF left_all, right_all;  // best winners without the cross check
};

BlockMatchMaps block_match_full(const StereoPair& pair, int max_disp, int patch = 7,
                                int threads = 1);

// Cross-checked left map only; `right_disparity`, when given, receives the
// cross-checked right map.
ImageF block_match(const StereoPair& pair, int max_disp, int patch = 7, int threads = 1,
                   ImageF* right_disparity = nullptr);

// Fused panoramic pseudo-label over the cropped band.
struct PanoramaLabel {
  DepthMap depth;                 // median of per-view candidates; 0 invalid
  std::vector<uint8_t> support;   // contributing views per pixel
  std::vector<float> source_yaw;  // pair yaw (deg) of the median contributor
};

// One directional depth source for fusion: a disparity map referenced to
// `pinhole` (the left or right member of a rectified pair). Disparity d at
// pixel x means the partner column lies at x - d (left reference) or x + d
// (right reference); depth along the pinhole ray is focal * baseline / d
// either way.
struct FusionView {
  const ImageF* disparity = nullptr;
  const VirtualPinhole* pinhole = nullptr;
  double baseline = 0;
  double focal = 0;
  double pair_yaw_deg = 0;
};

// Back-projects each view's disparity to rig-frame points, splats them into
// the band (per-view per-cell median of deposited samples), and fuses the
// per-view candidates with the median. Candidate distances are clamped to
// the rig depth range. `footprint` widens each deposit to a
// (2*footprint+1)^2 cell neighbourhood (column wrap-around); 0 deposits into
// the nearest cell only.
PanoramaLabel fuse_views(const std::vector<FusionView>& views, const RigConfig& rig,
                         const SphereGrid& grid, int row_begin, int row_end, int threads = 1,
                         int footprint = 0);

// fuse_views over the pairs' left-referenced maps; entry point for disparity
// maps imported from an external matcher (one map per pair).
PanoramaLabel fuse_panorama(const std::vector<ImageF>& disparities,
                            const std::vector<StereoPair>& pairs, const RigConfig& rig,
                            const SphereGrid& grid, int row_begin, int row_end, int threads = 1);

// fuse_views over `verified`, then fills cells left without support from
// `unverified` (one-eyed matches around half-occlusions), widening the
// deposit footprint until every cell has a candidate, so silhouette rims no
// view can triangulate inherit the neighbourhood consensus. Rescued cells get
// their confidence scaled by 1/4 per widening step to mark the weaker
// evidence.
PanoramaLabel fuse_with_rescue(const std::vector<FusionView>& verified,
                               const std::vector<FusionView>& unverified, const RigConfig& rig,
                               const SphereGrid& grid, int row_begin, int row_end,
                               int threads = 1);

// Whole teacher chain: rectify the six adjacent pairs, block-match each, and
// fuse both references of every pair (twelve directional maps), so each
// band direction is voted on by at least two independent windows; cells with
// no cross-checked support fall back to unverified matches (fuse_with_rescue).
PanoramaLabel teacher_pseudo_label(const RigConfig& rig, std::span<const ImageF> images,
                                   const SphereGrid& grid, int row_begin, int row_end,
                                   const PinholeSpec& spec = {}, int max_disp = 160,
                                   int patch = 7, int threads = 1);

// The six unique adjacent pairs, ascending: (0,1), (1,2), ..., (5,0).
std::vector<std::pair<int, int>> adjacent_pairs();

}  // namespace omnisweep

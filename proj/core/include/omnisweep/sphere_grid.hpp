#pragma once

#include <vector>

#include "omnisweep/geometry.hpp"

namespace omnisweep {

// Equirectangular direction grid in the rig frame.
//   column c -> azimuth  psi(c)   = -pi + c * 2*pi/width
//   row    r -> polar    theta(r) = r * pi/height        (0 = up pole)
//   direction = (sin theta cos psi, sin theta sin psi, cos theta)
// Row height/2 is exactly the horizon; column width/2 is exactly azimuth 0
// (the rig +x axis).
struct SphereGrid {
  int width = 0;
  int height = 0;
  std::vector<Vec3> directions;  // height x width, row-major

  const Vec3& dir(int row, int col) const { return directions[size_t(row) * width + col]; }
  double azimuth(int col) const { return -kPi + col * 2.0 * kPi / width; }
  double polar(int row) const { return row * kPi / height; }
};

SphereGrid build_sphere_grid(int width, int height);

// Depth samples uniform in inverse depth, endpoints exact.
struct DepthHypotheses {
  std::vector<double> depths;  // strictly increasing, meters
  double min_depth = 0;
  double max_depth = 0;

  int count() const { return int(depths.size()); }
  double inv(int i) const { return 1.0 / depths[i]; }
  // Inverse-depth spacing between consecutive hypotheses (uniform).
  double inv_step() const {
    return (1.0 / min_depth - 1.0 / max_depth) / (depths.size() - 1);
  }
};

DepthHypotheses sample_hypotheses(double min_depth, double max_depth, int d);

}  // namespace omnisweep

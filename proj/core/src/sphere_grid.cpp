#include "omnisweep/sphere_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace omnisweep {

SphereGrid build_sphere_grid(int width, int height) {
  if (width < 4 || height < 2)
    throw std::invalid_argument("build_sphere_grid: need width >= 4, height >= 2");
  SphereGrid grid;
  grid.width = width;
  grid.height = height;
  grid.directions.resize(size_t(width) * height);
  for (int r = 0; r < height; ++r) {
    const double theta = r * kPi / height;
    const double st = std::sin(theta);
    // Row height/2 lies exactly on the horizon.
    const double ct = 2 * r == height ? 0.0 : std::cos(theta);
    for (int c = 0; c < width; ++c) {
      const double psi = -kPi + c * 2.0 * kPi / width;
      grid.directions[size_t(r) * width + c] = Vec3(st * std::cos(psi), st * std::sin(psi), ct);
    }
  }
  return grid;
}

DepthHypotheses sample_hypotheses(double min_depth, double max_depth, int d) {
  if (!(min_depth > 0 && min_depth < max_depth))
    throw std::invalid_argument("sample_hypotheses: need 0 < min_depth < max_depth");
  if (d < 2) throw std::invalid_argument("sample_hypotheses: need d >= 2");

  DepthHypotheses hyp;
  hyp.min_depth = min_depth;
  hyp.max_depth = max_depth;
  hyp.depths.resize(d);
  const double inv_near = 1.0 / min_depth;
  const double inv_far = 1.0 / max_depth;
  for (int i = 0; i < d; ++i)
    hyp.depths[i] = 1.0 / (inv_near + (double(i) / (d - 1)) * (inv_far - inv_near));
  hyp.depths.front() = min_depth;
  hyp.depths.back() = max_depth;
  return hyp;
}

}  // namespace omnisweep

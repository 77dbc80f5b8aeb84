#pragma once

#include <string>

#include "omnisweep/matching.hpp"

namespace omnisweep {

// Point cloud with per-point properties x,y,z (float), gray (uchar),
// distance (float). `binary` selects binary_little_endian over ascii.
void write_ply(const std::string& path, const PointCloud& cloud, bool binary = true);

PointCloud read_ply(const std::string& path);

}  // namespace omnisweep

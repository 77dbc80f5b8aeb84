#pragma once

#include <string>

#include "omnisweep/geometry.hpp"

namespace omnisweep {

// Rig configuration file: JSON with one block per camera. Angles are stored
// in degrees, lengths in meters. The loader validates every invariant and
// reports field-level errors via std::invalid_argument.
RigConfig load_rig(const std::string& path);
void save_rig(const RigConfig& rig, const std::string& path);

}  // namespace omnisweep

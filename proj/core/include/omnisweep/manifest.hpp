#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace omnisweep {

// One manifest per output directory: enough of a fingerprint to rerun the
// command and reproduce the outputs (the deterministic stages bitwise).
struct RunManifest {
  std::string command;       // subcommand and flags as invoked
  std::string tool_version;
  uint64_t rig_hash = 0;
  uint64_t seed = 0;
  int threads = 0;
  std::map<std::string, std::string> params;  // grid, depths, stride, ...
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string timestamp;  // ISO 8601 UTC; informational only
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

// Current UTC time formatted as ISO 8601.
std::string iso8601_utc_now();

}  // namespace omnisweep

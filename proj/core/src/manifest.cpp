#include "omnisweep/manifest.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace omnisweep {

using nlohmann::json;

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const std::string& path, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << m.rig_hash;
  j["rig_hash"] = hash.str();
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["params"] = m.params;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["timestamp"] = m.timestamp.empty() ? iso8601_utc_now() : m.timestamp;

  std::ofstream os(path);
  if (!os) throw std::runtime_error("manifest: cannot open for writing: " + path);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("manifest: write failed: " + path);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("manifest: cannot open: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest: " + path + ": " + e.what());
  }

  RunManifest m;
  m.command = j.value("command", "");
  m.tool_version = j.value("tool_version", "");
  if (j.contains("rig_hash")) m.rig_hash = std::stoull(j["rig_hash"].get<std::string>(), nullptr, 16);
  m.seed = j.value("seed", uint64_t(0));
  m.threads = j.value("threads", 0);
  if (j.contains("params"))
    for (auto& [key, value] : j["params"].items()) m.params[key] = value.get<std::string>();
  if (j.contains("inputs")) m.inputs = j["inputs"].get<std::vector<std::string>>();
  if (j.contains("outputs")) m.outputs = j["outputs"].get<std::vector<std::string>>();
  m.timestamp = j.value("timestamp", "");
  return m;
}

}  // namespace omnisweep

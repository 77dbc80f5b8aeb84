#include "omnisweep/rig_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace omnisweep {

using nlohmann::json;

namespace {

double get_num(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number())
    throw std::invalid_argument(ctx + "." + key + ": missing or not a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw std::invalid_argument(ctx + "." + key + ": missing or not an integer");
  return j[key].get<int>();
}

FisheyeCamera parse_camera(const json& j, const std::string& ctx) {
  FisheyeCamera cam;
  cam.width = get_int(j, "width", ctx);
  cam.height = get_int(j, "height", ctx);
  cam.fx = get_num(j, "fx", ctx);
  cam.fy = get_num(j, "fy", ctx);
  cam.cx = get_num(j, "cx", ctx);
  cam.cy = get_num(j, "cy", ctx);
  cam.hfov_deg = get_num(j, "hfov_deg", ctx);
  cam.vfov_deg = get_num(j, "vfov_deg", ctx);
  if (!j.contains("k") || !j["k"].is_array() || j["k"].size() != 4)
    throw std::invalid_argument(ctx + ".k: expected 4 radial coefficients");
  for (int i = 0; i < 4; ++i) cam.k[i] = j["k"][i].get<double>();
  if (!j.contains("rotation") || !j["rotation"].is_array() || j["rotation"].size() != 3)
    throw std::invalid_argument(ctx + ".rotation: expected 3x3 matrix (3 rows)");
  for (int r = 0; r < 3; ++r) {
    const auto& row = j["rotation"][r];
    if (!row.is_array() || row.size() != 3)
      throw std::invalid_argument(ctx + ".rotation: row " + std::to_string(r) +
                                  " must have 3 entries");
    for (int c = 0; c < 3; ++c) cam.pose.rotation(r, c) = row[c].get<double>();
  }
  if (!j.contains("translation") || !j["translation"].is_array() || j["translation"].size() != 3)
    throw std::invalid_argument(ctx + ".translation: expected 3-vector (meters)");
  for (int r = 0; r < 3; ++r) cam.pose.translation(r) = j["translation"][r].get<double>();
  return cam;
}

json camera_to_json(const FisheyeCamera& cam) {
  json j;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["k"] = cam.k;
  j["hfov_deg"] = cam.hfov_deg;
  j["vfov_deg"] = cam.vfov_deg;
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    rot.push_back({cam.pose.rotation(r, 0), cam.pose.rotation(r, 1), cam.pose.rotation(r, 2)});
  j["rotation"] = rot;
  j["translation"] = {cam.pose.translation(0), cam.pose.translation(1), cam.pose.translation(2)};
  return j;
}

}  // namespace

RigConfig load_rig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rig file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("rig file " + path + ": " + e.what());
  }

  RigConfig rig;
  rig.min_depth = get_num(j, "min_depth", "rig");
  rig.max_depth = get_num(j, "max_depth", "rig");
  rig.num_hypotheses = get_int(j, "num_hypotheses", "rig");
  rig.sphere_width = get_int(j, "sphere_width", "rig");
  rig.sphere_height = get_int(j, "sphere_height", "rig");
  if (!j.contains("crop_rows") || !j["crop_rows"].is_array() || j["crop_rows"].size() != 2)
    throw std::invalid_argument("rig.crop_rows: expected [first, last]");
  rig.crop_rows = {j["crop_rows"][0].get<int>(), j["crop_rows"][1].get<int>()};
  if (j.contains("groups")) {
    const auto& g = j["groups"];
    if (!g.is_array() || g.size() != 2 || !g[0].is_array() || g[0].size() != 3 ||
        !g[1].is_array() || g[1].size() != 3)
      throw std::invalid_argument("rig.groups: expected two triples");
    for (int gi = 0; gi < 2; ++gi)
      for (int ci = 0; ci < 3; ++ci) rig.groups[gi][ci] = g[gi][ci].get<int>();
  }
  if (!j.contains("cameras") || !j["cameras"].is_array())
    throw std::invalid_argument("rig.cameras: expected an array");
  for (size_t i = 0; i < j["cameras"].size(); ++i)
    rig.cameras.push_back(parse_camera(j["cameras"][i], "cameras[" + std::to_string(i) + "]"));

  rig.validate();
  return rig;
}

void save_rig(const RigConfig& rig, const std::string& path) {
  json j;
  j["min_depth"] = rig.min_depth;
  j["max_depth"] = rig.max_depth;
  j["num_hypotheses"] = rig.num_hypotheses;
  j["sphere_width"] = rig.sphere_width;
  j["sphere_height"] = rig.sphere_height;
  j["crop_rows"] = {rig.crop_rows.first, rig.crop_rows.second};
  j["groups"] = rig.groups;
  json cams = json::array();
  for (const auto& cam : rig.cameras) cams.push_back(camera_to_json(cam));
  j["cameras"] = cams;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write rig file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace omnisweep

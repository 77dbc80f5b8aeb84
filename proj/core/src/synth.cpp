#include "omnisweep/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "omnisweep/parallel.hpp"
#include "omnisweep/rng.hpp"

namespace omnisweep {

using nlohmann::json;

void Scene::validate() const {
  if (primitives.empty()) throw std::invalid_argument("scene: needs at least one primitive");
  for (size_t i = 0; i < primitives.size(); ++i) {
    const Primitive& p = primitives[i];
    const std::string tag = "scene: primitives[" + std::to_string(i) + "]: ";
    if (!p.pose.translation.allFinite() || !p.pose.rotation.allFinite() || !p.size.allFinite())
      throw std::invalid_argument(tag + "parameters must be finite");
    if (!p.pose.is_orthonormal()) throw std::invalid_argument(tag + "pose rotation not orthonormal");
    if (p.kind == PrimitiveKind::kSphere && !(p.size.x() > 0))
      throw std::invalid_argument(tag + "sphere radius must be positive");
    if (p.kind == PrimitiveKind::kBox && !(p.size.minCoeff() > 0))
      throw std::invalid_argument(tag + "box half extents must be positive");
    if (!(p.texture.scale > 0)) throw std::invalid_argument(tag + "texture scale must be positive");
    if (!(p.texture.lo <= p.texture.hi))
      throw std::invalid_argument(tag + "texture shade range inverted");
  }
  if (!(background >= 0 && background <= 1))
    throw std::invalid_argument("scene: background must be in [0,1]");
}

namespace {

Vec3 parse_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("scene: " + what + ": expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Texture parse_texture(const json& j) {
  Texture t;
  const std::string kind = j.value("type", "checker");
  if (kind == "checker")
    t.kind = TextureKind::kChecker;
  else if (kind == "noise")
    t.kind = TextureKind::kNoise;
  else
    throw std::invalid_argument("scene: texture type must be 'checker' or 'noise', got '" + kind +
                                "'");
  t.seed = j.value("seed", uint64_t(0));
  t.scale = j.value("scale", 0.1);
  t.lo = j.value("lo", 0.1);
  t.hi = j.value("hi", 0.9);
  return t;
}

json texture_json(const Texture& t) {
  return json{{"type", t.kind == TextureKind::kChecker ? "checker" : "noise"},
              {"seed", t.seed},
              {"scale", t.scale},
              {"lo", t.lo},
              {"hi", t.hi}};
}

Mat3 yaw_rotation(double yaw_deg) {
  const double a = deg_to_rad(yaw_deg);
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

// Frame whose local z axis is `normal`.
Mat3 plane_rotation(const Vec3& normal) {
  const Vec3 n = normal.normalized();
  const Vec3 helper = std::abs(n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  const Vec3 x = helper.cross(n).normalized();
  const Vec3 y = n.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = n;
  return r;
}

}  // namespace

Scene load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("scene: cannot open: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("scene: " + path + ": " + e.what());
  }

  Scene scene;
  scene.background = j.value("background", 0.5);
  if (!j.contains("primitives") || !j["primitives"].is_array())
    throw std::invalid_argument("scene: missing 'primitives' array");
  for (const json& pj : j["primitives"]) {
    Primitive p;
    const std::string type = pj.value("type", "");
    if (type == "sphere") {
      p.kind = PrimitiveKind::kSphere;
      p.pose.translation = parse_vec3(pj.at("center"), "sphere center");
      p.size = Vec3::Constant(pj.at("radius").get<double>());
    } else if (type == "plane") {
      p.kind = PrimitiveKind::kPlane;
      p.pose.translation = parse_vec3(pj.at("point"), "plane point");
      p.pose.rotation = plane_rotation(parse_vec3(pj.at("normal"), "plane normal"));
    } else if (type == "box") {
      p.kind = PrimitiveKind::kBox;
      p.pose.translation = parse_vec3(pj.at("center"), "box center");
      p.size = parse_vec3(pj.at("half_extents"), "box half_extents");
      p.pose.rotation = yaw_rotation(pj.value("yaw_deg", 0.0));
    } else {
      throw std::invalid_argument("scene: primitive type must be sphere/plane/box, got '" + type +
                                  "'");
    }
    if (pj.contains("texture")) p.texture = parse_texture(pj["texture"]);
    scene.primitives.push_back(p);
  }
  scene.validate();
  return scene;
}

void save_scene(const std::string& path, const Scene& scene) {
  scene.validate();
  json j;
  j["background"] = scene.background;
  j["primitives"] = json::array();
  for (const Primitive& p : scene.primitives) {
    json pj;
    const Vec3& t = p.pose.translation;
    switch (p.kind) {
      case PrimitiveKind::kSphere:
        pj["type"] = "sphere";
        pj["center"] = {t.x(), t.y(), t.z()};
        pj["radius"] = p.size.x();
        break;
      case PrimitiveKind::kPlane: {
        pj["type"] = "plane";
        pj["point"] = {t.x(), t.y(), t.z()};
        const Vec3 n = p.pose.rotation.col(2);
        pj["normal"] = {n.x(), n.y(), n.z()};
        break;
      }
      case PrimitiveKind::kBox: {
        pj["type"] = "box";
        pj["center"] = {t.x(), t.y(), t.z()};
        pj["half_extents"] = {p.size.x(), p.size.y(), p.size.z()};
        pj["yaw_deg"] = rad_to_deg(std::atan2(p.pose.rotation(1, 0), p.pose.rotation(0, 0)));
        break;
      }
    }
    pj["texture"] = texture_json(p.texture);
    j["primitives"].push_back(pj);
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("scene: cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

namespace {

constexpr double kRayEps = 1e-9;

// Nearest t > kRayEps for one primitive; returns infinity on miss.
double intersect(const Primitive& p, const Vec3& o, const Vec3& d, Vec3* local_out) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (p.kind) {
    case PrimitiveKind::kSphere: {
      const Vec3 oc = o - p.pose.translation;
      const double b = oc.dot(d);
      const double c = oc.squaredNorm() - p.size.x() * p.size.x();
      const double disc = b * b - c;
      if (disc < 0) return inf;
      const double sq = std::sqrt(disc);
      double t = -b - sq;
      if (t <= kRayEps) t = -b + sq;
      if (t <= kRayEps) return inf;
      if (local_out) *local_out = o + t * d - p.pose.translation;
      return t;
    }
    case PrimitiveKind::kPlane: {
      const Mat3 rt = p.pose.rotation.transpose();
      const Vec3 ol = rt * (o - p.pose.translation);
      const Vec3 dl = rt * d;
      if (dl.z() == 0) return inf;
      const double t = -ol.z() / dl.z();
      if (t <= kRayEps) return inf;
      if (local_out) *local_out = ol + t * dl;
      return t;
    }
    case PrimitiveKind::kBox: {
      const Mat3 rt = p.pose.rotation.transpose();
      const Vec3 ol = rt * (o - p.pose.translation);
      const Vec3 dl = rt * d;
      double t_near = -inf, t_far = inf;
      for (int a = 0; a < 3; ++a) {
        if (dl[a] == 0) {
          if (std::abs(ol[a]) > p.size[a]) return inf;
          continue;
        }
        double t0 = (-p.size[a] - ol[a]) / dl[a];
        double t1 = (p.size[a] - ol[a]) / dl[a];
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
      }
      if (t_near > t_far) return inf;
      double t = t_near > kRayEps ? t_near : t_far;
      if (t <= kRayEps) return inf;
      if (local_out) *local_out = ol + t * dl;
      return t;
    }
  }
  return inf;
}

}  // namespace

bool trace(const Scene& scene, const Vec3& origin, const Vec3& dir, RayHit& hit) {
  hit = RayHit{};
  for (size_t i = 0; i < scene.primitives.size(); ++i) {
    Vec3 local;
    const double t = intersect(scene.primitives[i], origin, dir, &local);
    if (t < hit.t) {
      hit.t = t;
      hit.prim = int(i);
      hit.local = local;
    }
  }
  if (hit.prim < 0) return false;
  hit.point = origin + hit.t * dir;
  return true;
}

double texture_value(const Primitive& prim, const Vec3& local_point) {
  const Texture& tx = prim.texture;
  const double inv = 1.0 / tx.scale;
  const int64_t qx = int64_t(std::floor(local_point.x() * inv));
  const int64_t qy = int64_t(std::floor(local_point.y() * inv));
  const int64_t qz = int64_t(std::floor(local_point.z() * inv));
  if (tx.kind == TextureKind::kChecker) return ((qx + qy + qz) & 1) ? tx.hi : tx.lo;
  uint64_t h = hash_combine(tx.seed, uint64_t(qx));
  h = hash_combine(h, uint64_t(qy));
  h = hash_combine(h, uint64_t(qz));
  // Second lattice at an irrational scale ratio and offset: a single cell
  // lattice repeats with one period, which hands correlation matchers false
  // peaks exactly one cell apart; the blend has no common period.
  const double inv2 = inv * 1.6180339887498949;
  uint64_t g = hash_combine(~tx.seed, uint64_t(int64_t(std::floor(local_point.x() * inv2 + 0.37))));
  g = hash_combine(g, uint64_t(int64_t(std::floor(local_point.y() * inv2 + 0.37))));
  g = hash_combine(g, uint64_t(int64_t(std::floor(local_point.z() * inv2 + 0.37))));
  return tx.lo + (tx.hi - tx.lo) * 0.5 * (to_unit(h) + to_unit(g));
}

ImageF render_fisheye(const Scene& scene, const FisheyeCamera& cam, int supersample,
                      uint64_t seed, int threads) {
  if (supersample < 1) throw std::invalid_argument("render_fisheye: supersample must be >= 1");
  scene.validate();

  ImageF img(cam.width, cam.height);
  const Vec3 origin = cam.pose.translation;
  const int ss = supersample;

  parallel_chunks(0, cam.height, threads, [&](int64_t y0, int64_t y1) {
    RayHit hit;
    for (int y = int(y0); y < y1; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        double acc = 0;
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            double px = x, py = y;  // ss == 1: exact pixel center
            if (ss > 1) {
              const uint64_t h =
                  hash_combine(hash_combine(seed, uint64_t(y) << 32 | uint32_t(x)),
                               uint64_t(sy) << 32 | uint32_t(sx));
              const double jx = to_unit(h);
              const double jy = to_unit(mix64(h));
              px = x - 0.5 + (sx + jx) / ss;
              py = y - 0.5 + (sy + jy) / ss;
              px = std::clamp(px, 0.0, double(cam.width) - 1.0);
              py = std::clamp(py, 0.0, double(cam.height) - 1.0);
            }
            const Vec3 dir_cam = unproject(cam, Vec2(px, py));
            const Vec3 dir = cam.pose.rotation * dir_cam;
            if (trace(scene, origin, dir, hit))
              acc += texture_value(scene.primitives[hit.prim], hit.local);
            else
              acc += scene.background;
          }
        }
        img.at(y, x) = float(acc / (double(ss) * ss));
      }
    }
  });
  return img;
}

DepthMap render_groundtruth_erp(const Scene& scene, const SphereGrid& grid, int row_begin,
                                int row_end, int threads) {
  if (row_begin < 0 || row_end > grid.height || row_begin >= row_end)
    throw std::invalid_argument("render_groundtruth_erp: crop rows out of range");
  scene.validate();

  DepthMap dm;
  dm.width = grid.width;
  dm.height = row_end - row_begin;
  dm.row_begin = row_begin;
  dm.depth.assign(size_t(dm.width) * dm.height, 0.0f);
  dm.confidence.assign(size_t(dm.width) * dm.height, 0.0f);

  parallel_chunks(0, dm.height, threads, [&](int64_t r0, int64_t r1) {
    RayHit hit;
    for (int r = int(r0); r < r1; ++r) {
      for (int c = 0; c < dm.width; ++c) {
        if (!trace(scene, Vec3::Zero(), grid.dir(row_begin + r, c), hit)) continue;
        dm.depth[dm.index(r, c)] = float(hit.t);
        dm.confidence[dm.index(r, c)] = 1.0f;
      }
    }
  });
  return dm;
}

}  // namespace omnisweep

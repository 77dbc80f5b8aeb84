#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "omnisweep/manifest.hpp"
#include "omnisweep/pfm.hpp"
#include "omnisweep/ply.hpp"
#include "omnisweep/png_io.hpp"
#include "omnisweep/rig_io.hpp"
#include "omnisweep/rng.hpp"

using namespace omnisweep;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

ImageF random_image(int w, int h, uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  ImageF img(w, h);
  Rng rng(seed);
  for (float& v : img.data) v = float(rng.uniform(lo, hi));
  return img;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("pfm round trip is bitwise and scanlines run bottom-up") {
  const ImageF img = random_image(33, 17, 5, -4.0f, 12.0f);
  TempFile f("io_test.pfm");
  write_pfm(f.path, img);

  const ImageF back = read_pfm(f.path);
  REQUIRE(back.width == 33);
  REQUIRE(back.height == 17);
  CHECK(bitwise_equal(img.data, back.data));

  // The first stored scanline must be the bottom image row.
  std::ifstream is(f.path, std::ios::binary);
  std::string tag;
  int w = 0, h = 0;
  double scale = 0;
  is >> tag >> w >> h >> scale;
  is.get();
  REQUIRE(tag == "Pf");
  CHECK(w == 33);
  CHECK(h == 17);
  CHECK(scale == -1.0);
  std::vector<float> first(33);
  is.read(reinterpret_cast<char*>(first.data()), 33 * 4);
  REQUIRE(is.good());
  for (int x = 0; x < 33; ++x) REQUIRE(first[x] == img.at(16, x));
}

TEST_CASE("pfm rejects color, malformed, and truncated files") {
  CHECK_THROWS_AS(read_pfm("io_test_missing.pfm"), std::runtime_error);

  TempFile color("io_test_color.pfm");
  std::ofstream(color.path, std::ios::binary) << "PF\n2 2\n-1.0\n" << std::string(48, 'x');
  CHECK_THROWS_AS(read_pfm(color.path), std::runtime_error);

  TempFile bad("io_test_bad.pfm");
  std::ofstream(bad.path, std::ios::binary) << "Pf\n-2 2\n-1.0\n";
  CHECK_THROWS_AS(read_pfm(bad.path), std::runtime_error);

  TempFile cut("io_test_cut.pfm");
  std::ofstream(cut.path, std::ios::binary) << "Pf\n4 4\n-1.0\n" << std::string(10, 'x');
  CHECK_THROWS_AS(read_pfm(cut.path), std::runtime_error);
}

TEST_CASE("gray8 png quantizes to half a step") {
  ImageF img = random_image(31, 14, 9);
  img.at(0, 0) = 0.0f;
  img.at(0, 1) = 1.0f;
  img.at(0, 2) = -0.3f;  // clamps to 0
  img.at(0, 3) = 1.7f;   // clamps to 1
  TempFile f("io_test_gray.png");
  write_png_gray8(f.path, img);

  const ImageF back = read_png_gray(f.path);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  CHECK(back.at(0, 0) == 0.0f);
  CHECK(back.at(0, 1) == 1.0f);
  CHECK(back.at(0, 2) == 0.0f);
  CHECK(back.at(0, 3) == 1.0f);
  for (int y = 0; y < img.height; ++y)
    for (int x = 4; x < img.width; ++x)
      REQUIRE(std::abs(back.at(y, x) - img.at(y, x)) <= 0.5f / 255.0f + 1e-7f);
}

TEST_CASE("depth png keeps millimeters, zero stays invalid") {
  ImageF depth(8, 3, 0.0f);
  depth.at(0, 0) = 1.2345f;
  depth.at(0, 1) = 0.001f;
  depth.at(0, 2) = 19.9994f;
  depth.at(1, 0) = 70.0f;   // beyond the 16-bit ceiling
  depth.at(1, 1) = -2.0f;   // negative collapses to invalid
  TempFile f("io_test_depth.png");
  write_png_depth_mm(f.path, depth);

  const ImageF back = read_png_depth_mm(f.path);
  REQUIRE(back.width == 8);
  REQUIRE(back.height == 3);
  CHECK(std::abs(back.at(0, 0) - 1.2345f) <= 0.0005f);
  CHECK(back.at(0, 1) == 0.001f);
  CHECK(std::abs(back.at(0, 2) - 19.9994f) <= 0.0005f);
  CHECK(back.at(1, 0) == 65.535f);
  CHECK(back.at(1, 1) == 0.0f);
  CHECK(back.at(2, 5) == 0.0f);
}

TEST_CASE("ply round trips in both encodings") {
  PointCloud cloud;
  Rng rng(13);
  for (int i = 0; i < 257; ++i) {
    cloud.xyz.push_back(float(rng.uniform(-9, 9)));
    cloud.xyz.push_back(float(rng.uniform(-9, 9)));
    cloud.xyz.push_back(float(rng.uniform(-9, 9)));
    cloud.gray.push_back(uint8_t(rng.uniform_int(0, 255)));
    cloud.distance.push_back(float(rng.uniform(0.1, 30)));
  }

  TempFile fb("io_test_bin.ply");
  write_ply(fb.path, cloud, true);
  {
    std::ifstream is(fb.path, std::ios::binary);
    std::string header(256, '\0');
    is.read(header.data(), 256);
    CHECK(header.find("binary_little_endian") != std::string::npos);
    CHECK(header.find("element vertex 257") != std::string::npos);
  }
  const PointCloud back_b = read_ply(fb.path);
  REQUIRE(back_b.size() == cloud.size());
  CHECK(bitwise_equal(back_b.xyz, cloud.xyz));
  CHECK(back_b.gray == cloud.gray);
  CHECK(bitwise_equal(back_b.distance, cloud.distance));

  // ASCII is written with 9 significant digits, enough to restore floats
  // exactly.
  TempFile fa("io_test_asc.ply");
  write_ply(fa.path, cloud, false);
  const PointCloud back_a = read_ply(fa.path);
  REQUIRE(back_a.size() == cloud.size());
  CHECK(bitwise_equal(back_a.xyz, cloud.xyz));
  CHECK(back_a.gray == cloud.gray);
  CHECK(bitwise_equal(back_a.distance, cloud.distance));

  CHECK_THROWS_AS(read_ply("io_test_missing.ply"), std::runtime_error);
}

TEST_CASE("rig file survives a round trip and reports bad fields by name") {
  RigConfig rig = default_hexagon_rig(0.17, 60, 480, 270, 161, 75);
  rig.sphere_width = 480;
  rig.sphere_height = 240;
  rig.num_hypotheses = 64;
  rig.min_depth = 0.5;
  rig.max_depth = 20;
  rig.crop_rows = {80, 160};
  rig.cameras[4].k = {0.01, -0.002, 0.0003, -4e-5};

  TempFile f("io_test_rig.json");
  save_rig(rig, f.path);
  const RigConfig back = load_rig(f.path);
  CHECK(rig_hash(back) == rig_hash(rig));
  CHECK(back.cameras[4].k == rig.cameras[4].k);
  CHECK(back.crop_rows == rig.crop_rows);

  nlohmann::json j;
  {
    std::ifstream is(f.path);
    is >> j;
  }
  j["cameras"][2]["fx"] = 0.0;
  TempFile broken("io_test_rig_broken.json");
  std::ofstream(broken.path) << j.dump(2);
  try {
    load_rig(broken.path);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("fx") != std::string::npos);
  }

  j["cameras"][2]["fx"] = 180.0;
  j.erase("min_depth");
  TempFile missing("io_test_rig_missing.json");
  std::ofstream(missing.path) << j.dump(2);
  try {
    load_rig(missing.path);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("min_depth") != std::string::npos);
  }

  TempFile garbage("io_test_rig_garbage.json");
  std::ofstream(garbage.path) << "{ not json";
  CHECK_THROWS_AS(load_rig(garbage.path), std::invalid_argument);
}

TEST_CASE("run manifest round trips every field") {
  RunManifest m;
  m.command = "estimate --in scans --mode soft";
  m.tool_version = "0.3.1";
  m.rig_hash = 0xdeadbeefcafef00dull;
  m.seed = 42;
  m.threads = 3;
  m.params = {{"grid", "480x240"}, {"stride", "4"}};
  m.inputs = {"cam0.png", "cam1.png"};
  m.outputs = {"depth.pfm"};
  m.timestamp = iso8601_utc_now();

  TempFile f("io_test_manifest.json");
  write_manifest(f.path, m);
  const RunManifest back = read_manifest(f.path);
  CHECK(back.command == m.command);
  CHECK(back.tool_version == m.tool_version);
  CHECK(back.rig_hash == m.rig_hash);
  CHECK(back.seed == m.seed);
  CHECK(back.threads == m.threads);
  CHECK(back.params == m.params);
  CHECK(back.inputs == m.inputs);
  CHECK(back.outputs == m.outputs);
  CHECK(back.timestamp == m.timestamp);

  // Timestamp shape: 2026-01-02T03:04:05Z
  REQUIRE(m.timestamp.size() == 20);
  CHECK(m.timestamp[4] == '-');
  CHECK(m.timestamp[10] == 'T');
  CHECK(m.timestamp.back() == 'Z');
}

TEST_SUITE_END();

#include "omnisweep/table_cache.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace omnisweep {

namespace {

constexpr char kMagic[8] = {'O', 'S', 'W', 'T', 'B', 'L', '0', '\n'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v, const std::string& path) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("table cache: truncated file: " + path);
}

template <typename T>
void write_vec(std::ostream& os, const std::vector<T>& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           std::streamsize(v.size() * sizeof(T)));
}

template <typename T>
void read_vec(std::istream& is, std::vector<T>& v, size_t n, const std::string& path) {
  v.resize(n);
  is.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(T)));
  if (!is) throw std::runtime_error("table cache: truncated file: " + path);
}

struct Header {
  uint32_t version = 0;
  uint64_t rig_hash = 0;
  int32_t group_id = 0;
  int32_t source_camera = 0;
  int32_t depths = 0, height = 0, width = 0, stride = 0;
  std::array<int32_t, 6> feat_width{};
  std::array<int32_t, 6> feat_height{};
  uint64_t valid_count = 0;
};

Header read_header(std::istream& is, const std::string& path) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("table cache: not a mapping table file: " + path);
  Header h;
  read_pod(is, h.version, path);
  if (h.version != kVersion)
    throw std::runtime_error("table cache: " + path + ": format version " +
                             std::to_string(h.version) + ", expected " +
                             std::to_string(kVersion));
  read_pod(is, h.rig_hash, path);
  read_pod(is, h.group_id, path);
  read_pod(is, h.source_camera, path);
  read_pod(is, h.depths, path);
  read_pod(is, h.height, path);
  read_pod(is, h.width, path);
  read_pod(is, h.stride, path);
  for (int i = 0; i < 6; ++i) read_pod(is, h.feat_width[i], path);
  for (int i = 0; i < 6; ++i) read_pod(is, h.feat_height[i], path);
  read_pod(is, h.valid_count, path);
  return h;
}

}  // namespace

void save_table(const std::string& path, const MappingTable& table, uint64_t rig_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("table cache: cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, rig_hash);
  write_pod(os, int32_t(table.group_id));
  write_pod(os, int32_t(table.source_camera));
  write_pod(os, int32_t(table.depths));
  write_pod(os, int32_t(table.height));
  write_pod(os, int32_t(table.width));
  write_pod(os, int32_t(table.stride));
  for (int i = 0; i < 6; ++i) write_pod(os, table.feat_width[i]);
  for (int i = 0; i < 6; ++i) write_pod(os, table.feat_height[i]);
  write_pod(os, table.valid_count);
  write_vec(os, table.src_x);
  write_vec(os, table.src_y);
  write_vec(os, table.cam_index);
  write_vec(os, table.valid);
  if (!os) throw std::runtime_error("table cache: write failed: " + path);
}

MappingTable load_table(const std::string& path, uint64_t expected_rig_hash) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("table cache: cannot open: " + path);
  const Header h = read_header(is, path);
  if (h.rig_hash != expected_rig_hash)
    throw std::runtime_error("table cache: " + path +
                             ": built for a different rig (hash mismatch); rebuild the table");

  MappingTable t;
  t.group_id = h.group_id;
  t.source_camera = h.source_camera;
  t.depths = h.depths;
  t.height = h.height;
  t.width = h.width;
  t.stride = h.stride;
  t.feat_width = h.feat_width;
  t.feat_height = h.feat_height;
  t.valid_count = h.valid_count;
  if (t.depths <= 0 || t.height <= 0 || t.width <= 0)
    throw std::runtime_error("table cache: corrupt dimensions in " + path);
  const size_t n = size_t(t.depths) * t.height * t.width;
  read_vec(is, t.src_x, n, path);
  read_vec(is, t.src_y, n, path);
  read_vec(is, t.cam_index, n, path);
  read_vec(is, t.valid, n, path);
  return t;
}

uint64_t peek_table_rig_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("table cache: cannot open: " + path);
  return read_header(is, path).rig_hash;
}

}  // namespace omnisweep

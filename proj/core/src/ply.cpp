#include "omnisweep/ply.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace omnisweep {

void write_ply(const std::string& path, const PointCloud& cloud, bool binary) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ply: cannot open for writing: " + path);

  const size_t n = cloud.size();
  os << "ply\n"
     << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
     << "element vertex " << n << "\n"
     << "property float x\nproperty float y\nproperty float z\n"
     << "property uchar gray\n"
     << "property float distance\n"
     << "end_header\n";

  if (binary) {
    for (size_t i = 0; i < n; ++i) {
      os.write(reinterpret_cast<const char*>(&cloud.xyz[i * 3]), 12);
      os.write(reinterpret_cast<const char*>(&cloud.gray[i]), 1);
      os.write(reinterpret_cast<const char*>(&cloud.distance[i]), 4);
    }
  } else {
    std::ostringstream text;
    text.precision(9);
    for (size_t i = 0; i < n; ++i)
      text << cloud.xyz[i * 3] << ' ' << cloud.xyz[i * 3 + 1] << ' ' << cloud.xyz[i * 3 + 2]
           << ' ' << int(cloud.gray[i]) << ' ' << cloud.distance[i] << '\n';
    os << text.str();
  }
  if (!os) throw std::runtime_error("ply: write failed: " + path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ply: cannot open: " + path);

  std::string line;
  if (!std::getline(is, line) || line != "ply")
    throw std::runtime_error("ply: not a ply file: " + path);

  bool binary = false;
  size_t n = 0;
  std::vector<std::string> props;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian")
        binary = true;
      else if (fmt != "ascii")
        throw std::runtime_error("ply: unsupported format '" + fmt + "': " + path);
    } else if (word == "element") {
      std::string kind;
      ls >> kind >> n;
      if (kind != "vertex") throw std::runtime_error("ply: unsupported element: " + path);
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  const std::vector<std::string> expected = {"x", "y", "z", "gray", "distance"};
  if (props != expected)
    throw std::runtime_error("ply: unexpected vertex layout: " + path);

  PointCloud cloud;
  cloud.xyz.resize(n * 3);
  cloud.gray.resize(n);
  cloud.distance.resize(n);
  if (binary) {
    for (size_t i = 0; i < n; ++i) {
      is.read(reinterpret_cast<char*>(&cloud.xyz[i * 3]), 12);
      is.read(reinterpret_cast<char*>(&cloud.gray[i]), 1);
      is.read(reinterpret_cast<char*>(&cloud.distance[i]), 4);
    }
    if (!is) throw std::runtime_error("ply: truncated data: " + path);
  } else {
    for (size_t i = 0; i < n; ++i) {
      int g = 0;
      if (!(is >> cloud.xyz[i * 3] >> cloud.xyz[i * 3 + 1] >> cloud.xyz[i * 3 + 2] >> g >>
            cloud.distance[i]))
        throw std::runtime_error("ply: truncated data: " + path);
      cloud.gray[i] = uint8_t(g);
    }
  }
  return cloud;
}

}  // namespace omnisweep

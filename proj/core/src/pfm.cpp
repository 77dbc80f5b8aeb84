#include "omnisweep/pfm.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace omnisweep {

namespace {

float swap_float(float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  u = __builtin_bswap32(u);
  std::memcpy(&v, &u, 4);
  return v;
}

constexpr bool kHostLittle = std::endian::native == std::endian::little;

}  // namespace

void write_pfm(const std::string& path, const ImageF& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("pfm: cannot open for writing: " + path);
  os << "Pf\n" << image.width << " " << image.height << "\n" << (kHostLittle ? -1.0 : 1.0)
     << "\n";
  for (int y = image.height - 1; y >= 0; --y)
    os.write(reinterpret_cast<const char*>(&image.at(y, 0)),
             std::streamsize(image.width) * 4);
  if (!os) throw std::runtime_error("pfm: write failed: " + path);
}

ImageF read_pfm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("pfm: cannot open: " + path);

  std::string tag;
  is >> tag;
  if (tag != "Pf")
    throw std::runtime_error("pfm: " + path + ": expected grayscale 'Pf', got '" + tag + "'");
  int w = 0, h = 0;
  double scale = 0;
  is >> w >> h >> scale;
  if (!is || w <= 0 || h <= 0 || scale == 0)
    throw std::runtime_error("pfm: malformed header: " + path);
  is.get();  // single whitespace byte terminating the header

  ImageF img(w, h);
  for (int y = h - 1; y >= 0; --y) {
    is.read(reinterpret_cast<char*>(&img.at(y, 0)), std::streamsize(w) * 4);
    if (!is) throw std::runtime_error("pfm: truncated data: " + path);
  }
  const bool file_little = scale < 0;
  if (file_little != kHostLittle)
    for (float& v : img.data) v = swap_float(v);
  return img;
}

}  // namespace omnisweep

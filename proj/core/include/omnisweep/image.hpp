#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace omnisweep {

// Row-major single-channel raster. Continuous coordinates coincide with
// pixel indices: sampling at integer (x, y) hits the pixel center.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(size_t(w) * h, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Image: dimensions must be positive");
  }

  T& at(int y, int x) { return data[size_t(y) * width + x]; }
  const T& at(int y, int x) const { return data[size_t(y) * width + x]; }
  size_t size() const { return data.size(); }
  bool same_size(const Image& o) const { return width == o.width && height == o.height; }
};

using ImageF = Image<float>;
using ImageU8 = Image<uint8_t>;
using ImageU16 = Image<uint16_t>;

// Bilinear sample with edge clamping. (x, y) in pixel-center coordinates.
template <typename T>
inline double sample_bilinear(const Image<T>& img, double x, double y) {
  if (x < 0) x = 0;
  if (y < 0) y = 0;
  if (x > img.width - 1) x = img.width - 1;
  if (y > img.height - 1) y = img.height - 1;
  const int x0 = int(x), y0 = int(y);
  const int x1 = x0 + 1 < img.width ? x0 + 1 : x0;
  const int y1 = y0 + 1 < img.height ? y0 + 1 : y0;
  const double fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
         fy * ((1 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
}

}  // namespace omnisweep

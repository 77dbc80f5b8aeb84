#pragma once

#include <string>

#include "omnisweep/image.hpp"

namespace omnisweep {

// PNG helpers. Intensities live in [0,1]; depth PNGs quantize meters to
// 16-bit millimeters (0 = invalid, 65.535 m ceiling).

// 8/16-bit gray or color PNG -> [0,1] gray (BT.601 luma for color inputs).
ImageF read_png_gray(const std::string& path);

void write_png_gray8(const std::string& path, const ImageF& image);

void write_png_depth_mm(const std::string& path, const ImageF& depth_m);
ImageF read_png_depth_mm(const std::string& path);

}  // namespace omnisweep

#pragma once

#include <string>

#include "omnisweep/image.hpp"

namespace omnisweep {

// Grayscale PFM ("Pf"), 32-bit float scanlines stored bottom-to-top. The
// scale's sign encodes endianness; we write -1.0 (little-endian) and read
// either byte order.
void write_pfm(const std::string& path, const ImageF& image);
ImageF read_pfm(const std::string& path);

}  // namespace omnisweep

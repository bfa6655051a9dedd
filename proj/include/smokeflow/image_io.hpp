#pragma once

#include <string>

#include "smokeflow/imaging.hpp"

namespace smokeflow {

struct RgbImage {
  Frame r;
  Frame g;
  Frame b;
};

/// Reads PNG (8/16-bit gray, gray+alpha, RGB, RGBA) or PGM (P2/P5).
/// Colour input is reduced to luminance; alpha is ignored.
Frame read_image(const std::string& path);

/// 8-bit grayscale PNG; values are clamped to [0,1] and rounded.
void write_png(const Frame& f, const std::string& path);
void write_png(const RgbImage& img, const std::string& path);

}  // namespace smokeflow

#pragma once

#include <string>

#include "smokeflow/image_io.hpp"
#include "smokeflow/imaging.hpp"

namespace smokeflow {

/// Middlebury .flo: "PIEH", int32 width, int32 height, then row-major
/// interleaved (u, v) float32, all little-endian.
void write_flo(const FlowField& v, const std::string& path);
FlowField read_flo(const std::string& path);

/// Flow colour wheel: hue = atan2(v, u), saturation = min(|flow| / max_mag, 1),
/// value = 1, so zero flow is white. A non-positive `max_mag` selects the
/// 99th percentile magnitude.
RgbImage colorize(const FlowField& v, double max_mag = 0.0);

/// The magnitude `colorize` uses when asked for automatic scaling.
double auto_max_magnitude(const FlowField& v);

}  // namespace smokeflow

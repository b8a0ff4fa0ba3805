#pragma once

#include <cstdint>

#include "avrefine/grid.hpp"
#include "avrefine/raster.hpp"

namespace avr {

/// Two-pass 3-4 chamfer distance from each foreground pixel to the nearest
/// background pixel, in chamfer units (3 per axial step, 4 per diagonal).
/// Pixels outside the image count as background; background pixels get 0.
Grid<std::int32_t> chamfer_distance(const BinaryMap& foreground);

/// Full vessel width at a pixel: twice the chamfer distance in pixels,
/// never below 2.
inline double local_width(const Grid<std::int32_t>& chamfer, Pixel p) {
  const double w = 2.0 * static_cast<double>(chamfer.get_or(p.x, p.y, 0)) / 3.0;
  return w < 2.0 ? 2.0 : w;
}

}  // namespace avr

#pragma once

#include <span>
#include <vector>

#include "avrefine/grid.hpp"
#include "avrefine/raster.hpp"

namespace avr {

struct SkeletonMap {
  BinaryMap bits;
  double source_threshold = 0.0;  // 0 when not derived from a threshold

  int width() const { return bits.width(); }
  int height() const { return bits.height(); }
};

/// Zhang-Suen thinning to a one-pixel-wide, 8-connected skeleton.
///
/// Each sub-iteration marks deletable pixels against a frozen snapshot (in
/// parallel), then commits the marks in row-major order, re-checking each one
/// against the partially updated image. The re-check keeps 8-components
/// intact where plain parallel Zhang-Suen would erase them (2x2 blocks,
/// two-pixel diagonals). A final sequential pass removes redundant staircase
/// pixels: non-endpoints whose removal does not change local connectivity.
SkeletonMap thin(const BinaryMap& p);

/// binarize followed by thin for each threshold, in the given (strictly
/// descending) order. Throws std::invalid_argument on an empty or
/// non-descending list or a threshold outside (0,1).
std::vector<SkeletonMap> fuse_multiscale(const RealGrid& v, std::span<const double> thresholds);

/// Number of 8-neighbors set in `bits` around (x, y).
int neighbor_count(const BinaryMap& bits, int x, int y);

/// Yokoi 8-connectivity number; 1 means (x, y) is a simple point.
int connectivity_number(const BinaryMap& bits, int x, int y);

/// Labels 8-connected foreground components (-1 for background), returning
/// the component count. Labels are assigned in row-major order of first pixel.
int label_components(const BinaryMap& bits, Grid<int>& labels);

}  // namespace avr

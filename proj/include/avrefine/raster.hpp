#pragma once

#include <cstdint>

#include "avrefine/grid.hpp"

namespace avr {

enum class Label : std::uint8_t { background = 0, artery = 1, vein = 2 };

using BinaryMap = Grid<std::uint8_t>;
using LabelMap = Grid<Label>;

/// Vessel confidence plus the artery/vein softmax channels of a classifier.
/// Background softmax is the residual 1 - artery - vein.
struct ProbabilityMaps {
  RealGrid vessel;
  RealGrid artery;
  RealGrid vein;

  int width() const { return vessel.width(); }
  int height() const { return vessel.height(); }

  // Throws InputError when shapes disagree, a value leaves [0,1], or
  // artery + vein exceeds 1 + tolerance at any pixel.
  void validate(double sum_tolerance = 1e-6) const;
};

/// p_k = 1 iff v_k > theta. Throws std::invalid_argument unless 0 < theta < 1.
BinaryMap binarize(const RealGrid& v, double theta);

std::size_t count_foreground(const BinaryMap& map);

/// Foreground of a label map (any non-background label).
BinaryMap vessel_mask(const LabelMap& labels);

}  // namespace avr

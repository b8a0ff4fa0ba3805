#pragma once

// Data-parallel per-pixel kernels. Each kernel exists twice: a plain serial
// loop (the reference, used by tests and the benchmark) and an OpenMP
// version used by the library. Both must produce bitwise identical output.

#include <array>
#include <cstdint>
#include <span>

#include "avrefine/grid.hpp"
#include "avrefine/raster.hpp"

namespace avr::kernels {

using ConfusionCounts = std::array<std::uint64_t, 9>;  // [gt * 3 + pred]

/// Zhang-Suen deletion test for the pixel at (x, y) of `img` in the given
/// sub-iteration (0 or 1). Out-of-image neighbors count as background.
inline bool zhang_suen_deletable(const BinaryMap& img, int x, int y, int subiteration) {
  if (!img(x, y)) return false;
  // P2..P9 clockwise from north
  const int p2 = img.get_or(x, y - 1, 0) != 0;
  const int p3 = img.get_or(x + 1, y - 1, 0) != 0;
  const int p4 = img.get_or(x + 1, y, 0) != 0;
  const int p5 = img.get_or(x + 1, y + 1, 0) != 0;
  const int p6 = img.get_or(x, y + 1, 0) != 0;
  const int p7 = img.get_or(x - 1, y + 1, 0) != 0;
  const int p8 = img.get_or(x - 1, y, 0) != 0;
  const int p9 = img.get_or(x - 1, y - 1, 0) != 0;

  const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
  if (b < 2 || b > 6) return false;
  const int a = (!p2 && p3) + (!p3 && p4) + (!p4 && p5) + (!p5 && p6) + (!p6 && p7) +
                (!p7 && p8) + (!p8 && p9) + (!p9 && p2);
  if (a != 1) return false;
  if (subiteration == 0) return (p2 * p4 * p6) == 0 && (p4 * p6 * p8) == 0;
  return (p2 * p4 * p8) == 0 && (p2 * p6 * p8) == 0;
}

namespace serial {

void binarize(std::span<const float> v, double theta, std::span<std::uint8_t> out);

// Writes 1 into `marks` for every pixel deletable in this sub-iteration,
// evaluated against the frozen `img`. Returns the number of marks.
std::size_t zhang_suen_mark(const BinaryMap& img, int subiteration, BinaryMap& marks);

// For every support pixel, the lowest owner id among the nearest (Chebyshev)
// owned pixels within `radius`; -1 when none, and for non-support pixels.
void nearest_owner(const Grid<std::int32_t>& owner, const BinaryMap& support, int radius,
                   Grid<std::int32_t>& nearest);

ConfusionCounts confusion(std::span<const Label> pred, std::span<const Label> gt,
                          std::span<const std::uint8_t> mask);

}  // namespace serial

namespace omp {

void binarize(std::span<const float> v, double theta, std::span<std::uint8_t> out);
std::size_t zhang_suen_mark(const BinaryMap& img, int subiteration, BinaryMap& marks);
void nearest_owner(const Grid<std::int32_t>& owner, const BinaryMap& support, int radius,
                   Grid<std::int32_t>& nearest);
ConfusionCounts confusion(std::span<const Label> pred, std::span<const Label> gt,
                          std::span<const std::uint8_t> mask);

}  // namespace omp

}  // namespace avr::kernels

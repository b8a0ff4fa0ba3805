#include "avrefine/distance.hpp"

#include <algorithm>
#include <limits>

namespace avr {

Grid<std::int32_t> chamfer_distance(const BinaryMap& foreground) {
  constexpr std::int32_t kAxial = 3;
  constexpr std::int32_t kDiagonal = 4;
  constexpr std::int32_t kInf = std::numeric_limits<std::int32_t>::max() / 2;
  const int w = foreground.width();
  const int h = foreground.height();
  Grid<std::int32_t> d(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) d(x, y) = foreground(x, y) ? kInf : 0;
  }
  const auto at = [&](int x, int y) { return d.get_or(x, y, 0); };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!d(x, y)) continue;
      d(x, y) = std::min({d(x, y), at(x - 1, y) + kAxial, at(x - 1, y - 1) + kDiagonal,
                          at(x, y - 1) + kAxial, at(x + 1, y - 1) + kDiagonal});
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      if (!d(x, y)) continue;
      d(x, y) = std::min({d(x, y), at(x + 1, y) + kAxial, at(x + 1, y + 1) + kDiagonal,
                          at(x, y + 1) + kAxial, at(x - 1, y + 1) + kDiagonal});
    }
  }
  return d;
}

}  // namespace avr

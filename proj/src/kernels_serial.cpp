#include "avrefine/kernels.hpp"

namespace avr::kernels::serial {

void binarize(std::span<const float> v, double theta, std::span<std::uint8_t> out) {
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = static_cast<double>(v[k]) > theta ? 1 : 0;
}

std::size_t zhang_suen_mark(const BinaryMap& img, int subiteration, BinaryMap& marks) {
  std::size_t count = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const bool del = zhang_suen_deletable(img, x, y, subiteration);
      marks(x, y) = del ? 1 : 0;
      count += del;
    }
  }
  return count;
}

void nearest_owner(const Grid<std::int32_t>& owner, const BinaryMap& support, int radius,
                   Grid<std::int32_t>& nearest) {
  for (int y = 0; y < support.height(); ++y) {
    for (int x = 0; x < support.width(); ++x) {
      std::int32_t best = -1;
      if (support(x, y)) {
        // grow the window one ring at a time; first ring with an owner wins
        for (int d = 0; d <= radius && best < 0; ++d) {
          for (int yy = y - d; yy <= y + d; ++yy) {
            for (int xx = x - d; xx <= x + d; ++xx) {
              if (chebyshev({x, y}, {xx, yy}) != d || !owner.contains(xx, yy)) continue;
              const std::int32_t id = owner(xx, yy);
              if (id >= 0 && (best < 0 || id < best)) best = id;
            }
          }
        }
      }
      nearest(x, y) = best;
    }
  }
}

ConfusionCounts confusion(std::span<const Label> pred, std::span<const Label> gt,
                          std::span<const std::uint8_t> mask) {
  ConfusionCounts counts{};
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (!mask[k]) continue;
    ++counts[static_cast<std::size_t>(gt[k]) * 3 + static_cast<std::size_t>(pred[k])];
  }
  return counts;
}

}  // namespace avr::kernels::serial

#include <omp.h>

#include "avrefine/kernels.hpp"

namespace avr::kernels::omp {

void binarize(std::span<const float> v, double theta, std::span<std::uint8_t> out) {
  const auto n = static_cast<std::int64_t>(v.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) out[k] = static_cast<double>(v[k]) > theta ? 1 : 0;
}

std::size_t zhang_suen_mark(const BinaryMap& img, int subiteration, BinaryMap& marks) {
  const int h = img.height();
  const int w = img.width();
  std::size_t count = 0;
#pragma omp parallel for schedule(static) reduction(+ : count)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool del = zhang_suen_deletable(img, x, y, subiteration);
      marks(x, y) = del ? 1 : 0;
      count += del;
    }
  }
  return count;
}

namespace {

inline void consider(const Grid<std::int32_t>& owner, int x, int y, std::int32_t& best) {
  if (!owner.contains(x, y)) return;
  const std::int32_t id = owner(x, y);
  if (id >= 0 && (best < 0 || id < best)) best = id;
}

}  // namespace

void nearest_owner(const Grid<std::int32_t>& owner, const BinaryMap& support, int radius,
                   Grid<std::int32_t>& nearest) {
  const int h = support.height();
  const int w = support.width();
#pragma omp parallel for schedule(dynamic, 8)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int32_t best = -1;
      if (support(x, y)) {
        consider(owner, x, y, best);
        // ring perimeter only: top and bottom rows, then the side columns
        for (int d = 1; d <= radius && best < 0; ++d) {
          for (int xx = x - d; xx <= x + d; ++xx) {
            consider(owner, xx, y - d, best);
            consider(owner, xx, y + d, best);
          }
          for (int yy = y - d + 1; yy <= y + d - 1; ++yy) {
            consider(owner, x - d, yy, best);
            consider(owner, x + d, yy, best);
          }
        }
      }
      nearest(x, y) = best;
    }
  }
}

ConfusionCounts confusion(std::span<const Label> pred, std::span<const Label> gt,
                          std::span<const std::uint8_t> mask) {
  std::uint64_t counts[9] = {};
  const auto n = static_cast<std::int64_t>(pred.size());
#pragma omp parallel for schedule(static) reduction(+ : counts[:9])
  for (std::int64_t k = 0; k < n; ++k) {
    if (!mask[k]) continue;
    ++counts[static_cast<std::size_t>(gt[k]) * 3 + static_cast<std::size_t>(pred[k])];
  }
  ConfusionCounts out{};
  for (int i = 0; i < 9; ++i) out[i] = counts[i];
  return out;
}

}  // namespace avr::kernels::omp

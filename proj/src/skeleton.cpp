#include "avrefine/skeleton.hpp"

#include <stdexcept>

#include "avrefine/kernels.hpp"

namespace avr {

int neighbor_count(const BinaryMap& bits, int x, int y) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if ((dx || dy) && bits.get_or(x + dx, y + dy, 0)) ++n;
    }
  }
  return n;
}

int connectivity_number(const BinaryMap& bits, int x, int y) {
  // E, NE, N, NW, W, SW, S, SE
  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  int bg[9];
  for (int i = 0; i < 8; ++i) bg[i] = bits.get_or(x + kDx[i], y + kDy[i], 0) ? 0 : 1;
  bg[8] = bg[0];
  int c = 0;
  for (int k = 0; k < 8; k += 2) c += bg[k] - bg[k] * bg[k + 1] * bg[k + 2];
  return c;
}

int label_components(const BinaryMap& bits, Grid<int>& labels) {
  labels = Grid<int>(bits.width(), bits.height(), -1);
  int count = 0;
  std::vector<Pixel> stack;
  for (int y = 0; y < bits.height(); ++y) {
    for (int x = 0; x < bits.width(); ++x) {
      if (!bits(x, y) || labels(x, y) >= 0) continue;
      labels(x, y) = count;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (bits.get_or(nx, ny, 0) && labels(nx, ny) < 0) {
              labels(nx, ny) = count;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      ++count;
    }
  }
  return count;
}

namespace {

bool remove_redundant_pixels(BinaryMap& img) {
  bool any = false;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        if (!img(x, y)) continue;
        if (neighbor_count(img, x, y) >= 2 && connectivity_number(img, x, y) == 1) {
          img(x, y) = 0;
          changed = true;
          any = true;
        }
      }
    }
  }
  return any;
}

}  // namespace

SkeletonMap thin(const BinaryMap& p) {
  BinaryMap img(p.width(), p.height());
  {
    auto dst = img.values();
    auto src = p.values();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] ? 1 : 0;
  }
  BinaryMap marks(p.width(), p.height());

  bool changed = true;
  while (changed) {
    changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      if (kernels::omp::zhang_suen_mark(img, sub, marks) == 0) continue;
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          if (marks(x, y) && kernels::zhang_suen_deletable(img, x, y, sub)) {
            img(x, y) = 0;
            changed = true;
          }
        }
      }
    }
  }
  remove_redundant_pixels(img);
  return SkeletonMap{std::move(img), 0.0};
}

std::vector<SkeletonMap> fuse_multiscale(const RealGrid& v, std::span<const double> thresholds) {
  if (thresholds.empty()) throw std::invalid_argument("threshold list is empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
      throw std::invalid_argument("thresholds must lie in (0,1)");
    }
    if (i > 0 && !(thresholds[i] < thresholds[i - 1])) {
      throw std::invalid_argument("thresholds must be strictly descending");
    }
  }
  std::vector<SkeletonMap> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    SkeletonMap sk = thin(binarize(v, t));
    sk.source_threshold = t;
    out.push_back(std::move(sk));
  }
  return out;
}

}  // namespace avr

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "avrefine/raster.hpp"
#include "avrefine/skeleton.hpp"
#include "oracles.hpp"

using namespace avr;

namespace {

BinaryMap rect(int w, int h, int x0, int y0, int x1, int y1, BinaryMap b = {}) {
  if (b.empty()) b = BinaryMap(w, h);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) b(x, y) = 1;
  return b;
}

// Textbook two-pass Zhang-Suen, deleting all marked pixels at once.
BinaryMap textbook_zhang_suen(BinaryMap img) {
  const auto at = [&](int x, int y) { return img.get_or(x, y, 0) ? 1 : 0; };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<Pixel> kill;
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          if (!img(x, y)) continue;
          const int n[8] = {at(x, y - 1), at(x + 1, y - 1), at(x + 1, y), at(x + 1, y + 1),
                            at(x, y + 1), at(x - 1, y + 1), at(x - 1, y), at(x - 1, y - 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += n[k];
            a += !n[k] && n[(k + 1) % 8];
          }
          if (b < 2 || b > 6 || a != 1) continue;
          const bool c = pass == 0 ? !(n[0] && n[2] && n[4]) && !(n[2] && n[4] && n[6])
                                   : !(n[0] && n[2] && n[6]) && !(n[0] && n[4] && n[6]);
          if (c) kill.push_back({x, y});
        }
      }
      for (const Pixel p : kill) img[p] = 0;
      changed = changed || !kill.empty();
    }
  }
  return img;
}

bool has_full_2x2(const BinaryMap& b) {
  for (int y = 0; y + 1 < b.height(); ++y)
    for (int x = 0; x + 1 < b.width(); ++x)
      if (b(x, y) && b(x + 1, y) && b(x, y + 1) && b(x + 1, y + 1)) return true;
  return false;
}

// A full 2x2 block is only acceptable when none of its pixels could be
// removed without changing local connectivity.
bool blocks_are_necessary(const BinaryMap& b) {
  for (int y = 0; y + 1 < b.height(); ++y) {
    for (int x = 0; x + 1 < b.width(); ++x) {
      if (!(b(x, y) && b(x + 1, y) && b(x, y + 1) && b(x + 1, y + 1))) continue;
      for (const Pixel p : {Pixel{x, y}, Pixel{x + 1, y}, Pixel{x, y + 1}, Pixel{x + 1, y + 1}}) {
        if (connectivity_number(b, p.x, p.y) == 1) return false;
      }
    }
  }
  return true;
}

bool subset(const BinaryMap& a, const BinaryMap& b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.values()[k] && !b.values()[k]) return false;
  return true;
}

}  // namespace

TEST_CASE("empty map thins to an empty skeleton") {
  const SkeletonMap s = thin(BinaryMap(12, 9));
  CHECK(count_foreground(s.bits) == 0);
  CHECK(s.width() == 12);
  CHECK(s.height() == 9);
  CHECK(count_foreground(thin(BinaryMap(0, 0)).bits) == 0);
}

TEST_CASE("3 px high bar thins to its middle row") {
  const BinaryMap bar = rect(24, 9, 2, 2, 21, 4);
  const BinaryMap sk = thin(bar).bits;
  int count = 0;
  for (int y = 0; y < sk.height(); ++y) {
    for (int x = 0; x < sk.width(); ++x) {
      if (!sk(x, y)) continue;
      CHECK(y == 3);
      ++count;
    }
  }
  CHECK(count >= 18);  // endpoints may retract by one pixel
  CHECK(sk(3, 3));
  CHECK(sk(20, 3));

  // the reference thinning lands on the same row
  const BinaryMap ref = textbook_zhang_suen(bar);
  for (int x = 0; x < ref.width(); ++x) {
    CHECK_FALSE(ref(x, 2));
    CHECK_FALSE(ref(x, 4));
  }
  for (int x = 4; x <= 19; ++x) CHECK(ref(x, 3));
  for (int x = 4; x <= 19; ++x) CHECK(sk(x, 3));
}

namespace {

// Number of separate neighbor runs around (x, y), i.e. branches leaving it.
int branch_count(const BinaryMap& b, int x, int y) {
  int runs = 0;
  for (int k = 0; k < 8; ++k) {
    const int kn = (k + 1) % 8;
    const bool here = b.get_or(x + oracle::kDx[k], y + oracle::kDy[k], 0);
    const bool next = b.get_or(x + oracle::kDx[kn], y + oracle::kDy[kn], 0);
    runs += !here && next;
  }
  return runs;
}

}  // namespace

TEST_CASE("plus of two 3 px bars has one four-way junction") {
  BinaryMap plus = rect(21, 21, 2, 9, 18, 11);
  plus = rect(21, 21, 9, 2, 11, 18, plus);
  for (const BinaryMap& b : {thin(plus).bits, textbook_zhang_suen(plus)}) {
    std::vector<Pixel> four_way;
    for (int y = 0; y < b.height(); ++y)
      for (int x = 0; x < b.width(); ++x)
        if (b(x, y) && branch_count(b, x, y) == 4) four_way.push_back({x, y});
    REQUIRE(four_way.size() == 1);
    const Pixel c = four_way.front();
    CHECK(neighbor_count(b, c.x, c.y) == 4);
    // the arm pixels next to the junction also see four skeleton pixels
    for (int y = 0; y < b.height(); ++y)
      for (int x = 0; x < b.width(); ++x)
        if (b(x, y) && neighbor_count(b, x, y) == 4) CHECK(chebyshev({x, y}, c) <= 1);
  }
}

TEST_CASE("small blocks keep their component") {
  const SkeletonMap s = thin(rect(6, 6, 2, 2, 3, 3));
  CHECK(count_foreground(s.bits) >= 1);
  CHECK(oracle::count_components(s.bits) == 1);
  CHECK_FALSE(has_full_2x2(s.bits));
}

TEST_CASE("a block with four diagonal spurs survives thinning") {
  BinaryMap b(6, 6);
  for (const Pixel p : {Pixel{1, 1}, Pixel{4, 1}, Pixel{1, 4}, Pixel{4, 4}, Pixel{2, 2}, Pixel{3, 2}, Pixel{2, 3},
                        Pixel{3, 3}}) {
    b[p] = 1;
  }
  const BinaryMap s = thin(b).bits;
  CHECK(s == b);  // dropping any block pixel would cut a spur off
  CHECK(oracle::count_components(s) == 1);
}

TEST_CASE("Yokoi connectivity number") {
  BinaryMap line(5, 3);
  for (int x = 0; x < 5; ++x) line(x, 1) = 1;
  CHECK(connectivity_number(line, 2, 1) == 2);  // bridge
  CHECK(connectivity_number(line, 4, 1) == 1);  // end
  BinaryMap lone(3, 3);
  lone(1, 1) = 1;
  CHECK(connectivity_number(lone, 1, 1) == 0);
}

TEST_CASE("component labels match flood fill") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMap b = oracle::random_bits(rng, 20, 15, 0.35);
    Grid<int> labels;
    CHECK(label_components(b, labels) == oracle::count_components(b));
  }
}

TEST_CASE("thinning properties on random masks") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 8 + trial % 25;
    const int h = 8 + (trial * 7) % 25;
    const BinaryMap p = trial % 2 ? oracle::random_bits(rng, w, h, 0.3 + 0.4 * (trial % 5) / 4.0)
                                  : oracle::random_strokes(rng, w, h, 1 + trial % 4);
    const BinaryMap s = thin(p).bits;
    INFO("trial " << trial);
    REQUIRE(subset(s, p));
    REQUIRE(oracle::count_components(s) == oracle::count_components(p));
    if (trial % 2 == 0) REQUIRE_FALSE(has_full_2x2(s));
    else REQUIRE(blocks_are_necessary(s));
    REQUIRE(thin(s).bits == s);
  }
}

TEST_CASE("fuse_multiscale produces one skeleton per threshold") {
  std::mt19937_64 rng(2);
  const RealGrid v = oracle::random_field(rng, 30, 30);
  const std::vector<double> t{0.5, 0.3, 0.1};
  const auto sks = fuse_multiscale(v, t);
  REQUIRE(sks.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sks[i].source_threshold == t[i]);
    CHECK(sks[i].bits == thin(binarize(v, t[i])).bits);
  }
  const std::vector<double> single{0.5};
  CHECK(fuse_multiscale(v, single).front().bits == thin(binarize(v, 0.5)).bits);
}

TEST_CASE("uniform 0.4 map is empty only at 0.5") {
  const RealGrid v(20, 20, 0.4f);
  const std::vector<double> t{0.5, 0.3, 0.1};
  const auto sks = fuse_multiscale(v, t);
  CHECK(count_foreground(sks[0].bits) == 0);
  CHECK(count_foreground(sks[1].bits) > 0);
  CHECK(count_foreground(sks[2].bits) > 0);
}

TEST_CASE("fuse_multiscale rejects bad threshold lists") {
  const RealGrid v(8, 8, 0.4f);
  CHECK_THROWS_AS(fuse_multiscale(v, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(fuse_multiscale(v, std::vector<double>{0.3, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(fuse_multiscale(v, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(fuse_multiscale(v, std::vector<double>{1.2, 0.5}), std::invalid_argument);
}

TEST_CASE("high-threshold skeleton components lie inside low-threshold structures") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const RealGrid v = oracle::random_field(rng, 24, 24);
    const auto sks = fuse_multiscale(v, std::vector<double>{0.5, 0.1});
    const BinaryMap low = binarize(v, 0.1);
    Grid<int> labels;
    const int n = label_components(sks[0].bits, labels);
    std::vector<bool> hit(static_cast<std::size_t>(n), false);
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (labels.values()[k] >= 0 && low.values()[k]) hit[static_cast<std::size_t>(labels.values()[k])] = true;
    }
    for (bool h : hit) CHECK(h);
  }
}

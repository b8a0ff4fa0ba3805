#include "avrefine/vessel_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "avrefine/distance.hpp"
#include "avrefine/errors.hpp"

namespace avr {

double Vec2::norm() const { return std::hypot(x, y); }

bool CupRegion::contains(Pixel p) const {
  const double dx = static_cast<double>(p.x) - center_x;
  const double dy = static_cast<double>(p.y) - center_y;
  return dx * dx + dy * dy <= radius * radius;
}

double angle_degrees(const Vec2& a, const Vec2& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  // atan2 stays accurate near 0 and 180 degrees, where acos does not
  const double cross = a.x * b.y - a.y * b.x;
  const double dot = a.x * b.x + a.y * b.y;
  return std::atan2(std::abs(cross), dot) * 180.0 / std::numbers::pi;
}

namespace {

constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

std::vector<Pixel> skeletal_neighbors(const BinaryMap& bits, Pixel p) {
  std::vector<Pixel> out;
  for (int i = 0; i < 8; ++i) {
    const int nx = p.x + kDx[i];
    const int ny = p.y + kDy[i];
    if (bits.get_or(nx, ny, 0)) out.push_back({nx, ny});
  }
  return out;
}

void set_tangents(Segment& seg) {
  if (seg.pixels.size() < 2) return;
  seg.tangents[0] = endpoint_tangent(seg, End::start);
  seg.tangents[1] = endpoint_tangent(seg, End::end);
}

}  // namespace

std::vector<KeyPoint> find_keypoints(const SkeletonMap& skeleton) {
  std::vector<KeyPoint> out;
  const BinaryMap& bits = skeleton.bits;
  for (int y = 0; y < bits.height(); ++y) {
    for (int x = 0; x < bits.width(); ++x) {
      if (!bits(x, y)) continue;
      const int n = neighbor_count(bits, x, y);
      if (n > 2) out.push_back({{x, y}, KeyPointKind::crossing, skeleton.source_threshold});
      if (n <= 1) out.push_back({{x, y}, KeyPointKind::terminal, skeleton.source_threshold});
    }
  }
  return out;
}

std::vector<Segment> extract_segments(const SkeletonMap& skeleton, std::span<const KeyPoint> keypoints) {
  const BinaryMap& bits = skeleton.bits;
  Grid<std::uint8_t> is_key(bits.width(), bits.height());
  for (const KeyPoint& k : keypoints) {
    if (bits.contains(k.position)) is_key[k.position] = 1;
  }
  Grid<std::uint8_t> visited(bits.width(), bits.height());
  const std::size_t max_steps = bits.size() + 1;

  std::vector<Segment> segments;
  const auto emit = [&](std::vector<Pixel>&& chain, bool closed) {
    if (chain.size() < kMinSegmentPixels) return;
    Segment seg;
    seg.id = static_cast<int>(segments.size());
    seg.pixels = std::move(chain);
    seg.closed = closed;
    seg.source_threshold = skeleton.source_threshold;
    set_tangents(seg);
    segments.push_back(std::move(seg));
  };

  // chains leaving each keypoint
  for (const KeyPoint& k : keypoints) {
    for (const Pixel first : skeletal_neighbors(bits, k.position)) {
      // direct keypoint-keypoint steps form two-pixel chains, always dropped
      if (is_key[first] || visited[first]) continue;
      std::vector<Pixel> chain{k.position, first};
      visited[first] = 1;
      Pixel prev = k.position;
      Pixel cur = first;
      for (std::size_t step = 0; step < max_steps; ++step) {
        const auto nbrs = skeletal_neighbors(bits, cur);
        const auto next = std::find_if(nbrs.begin(), nbrs.end(), [&](Pixel q) { return q != prev; });
        if (next == nbrs.end()) break;
        chain.push_back(*next);
        if (is_key[*next]) break;
        visited[*next] = 1;
        prev = cur;
        cur = *next;
      }
      emit(std::move(chain), false);
    }
  }

  // what remains unvisited are cycles without any keypoint
  for (int y = 0; y < bits.height(); ++y) {
    for (int x = 0; x < bits.width(); ++x) {
      if (!bits(x, y) || is_key(x, y) || visited(x, y)) continue;
      const Pixel start{x, y};
      std::vector<Pixel> chain{start};
      visited[start] = 1;
      Pixel prev = start;
      Pixel cur = skeletal_neighbors(bits, start).front();
      for (std::size_t step = 0; step < max_steps && cur != start; ++step) {
        chain.push_back(cur);
        visited[cur] = 1;
        const auto nbrs = skeletal_neighbors(bits, cur);
        const auto next = std::find_if(nbrs.begin(), nbrs.end(), [&](Pixel q) { return q != prev; });
        if (next == nbrs.end()) break;
        prev = cur;
        cur = *next;
      }
      emit(std::move(chain), true);
    }
  }
  return segments;
}

Vec2 endpoint_tangent(const Segment& seg, End end) {
  const std::size_t n = seg.pixels.size();
  if (n < 2) throw std::invalid_argument("tangent of a single-pixel segment");
  const auto at = [&](std::size_t i) { return end == End::start ? seg.pixels[i] : seg.pixels[n - 1 - i]; };
  const Pixel origin = at(0);
  Pixel target = at(std::min<std::size_t>(5, n - 1));
  if (target == origin) {
    // a chain that returns to its own keypoint: use the farthest pixel instead
    long best = -1;
    for (std::size_t i = 1; i < n; ++i) {
      const Pixel q = at(i);
      const long d2 = static_cast<long>(q.x - origin.x) * (q.x - origin.x) +
                      static_cast<long>(q.y - origin.y) * (q.y - origin.y);
      if (d2 > best) {
        best = d2;
        target = q;
      }
    }
    if (best <= 0) throw std::invalid_argument("degenerate segment: all pixels coincide");
  }
  const Vec2 d{static_cast<double>(target.x - origin.x), static_cast<double>(target.y - origin.y)};
  const double len = d.norm();
  return {d.x / len, d.y / len};
}

double mean_thickness(const Segment& seg, const Grid<std::int32_t>& chamfer) {
  if (seg.pixels.empty()) return 2.0;
  double sum = 0.0;
  for (const Pixel p : seg.pixels) sum += local_width(chamfer, p);
  return sum / static_cast<double>(seg.pixels.size());
}

double mean_thickness(const Segment& seg, const BinaryMap& support) {
  return mean_thickness(seg, chamfer_distance(support));
}

namespace {

// Chebyshev-1 neighborhoods of retained segments, for overlap tests.
class NearIndex {
 public:
  NearIndex(int w, int h) : near_(static_cast<std::size_t>(w) * static_cast<std::size_t>(h)), w_(w), h_(h) {}

  void add(const Segment& seg) {
    for (const Pixel p : seg.pixels) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = p.x + dx;
          const int y = p.y + dy;
          if (x < 0 || y < 0 || x >= w_ || y >= h_) continue;
          auto& cell = near_[cell_index(x, y)];
          if (cell.empty() || cell.back() != seg.id) cell.push_back(seg.id);
        }
      }
    }
  }

  const std::vector<int>& at(Pixel p) const { return near_[cell_index(p.x, p.y)]; }

 private:
  std::size_t cell_index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x);
  }
  std::vector<std::vector<int>> near_;
  int w_;
  int h_;
};

std::size_t pixels_near(const Segment& of, const Segment& to) {
  std::size_t n = 0;
  for (const Pixel p : of.pixels) {
    n += std::any_of(to.pixels.begin(), to.pixels.end(), [&](Pixel q) { return chebyshev(p, q) <= 1; });
  }
  return n;
}

}  // namespace

VesselGraph build_graph(std::span<const SkeletonMap> skeletons, const BinaryMap& support,
                        const CupRegion& cup) {
  VesselGraph graph;
  graph.width = support.width();
  graph.height = support.height();
  for (const SkeletonMap& sk : skeletons) {
    if (!sk.bits.same_shape(support)) throw InputError("skeleton dimensions differ from vessel support");
  }
  const Grid<std::int32_t> chamfer = chamfer_distance(support);
  const int w = graph.width;
  const int h = graph.height;

  NearIndex retained_near(w, h);
  std::vector<std::vector<KeyPoint>> layer_keys;
  std::vector<int> segment_layer;

  for (std::size_t layer = 0; layer < skeletons.size(); ++layer) {
    const SkeletonMap& sk = skeletons[layer];
    layer_keys.push_back(find_keypoints(sk));
    std::vector<Segment> found = extract_segments(sk, layer_keys.back());
    const std::size_t first_new = graph.segments.size();

    for (Segment& cand : found) {
      bool duplicate = false;
      if (layer > 0) {
        std::map<int, std::size_t> hits;  // retained id -> cand pixels near it
        for (const Pixel p : cand.pixels) {
          for (int id : retained_near.at(p)) ++hits[id];
        }
        for (const auto& [id, count] : hits) {
          const Segment& kept = graph.segments[static_cast<std::size_t>(id)];
          double fraction = 0.0;
          if (cand.pixels.size() <= kept.pixels.size()) {
            fraction = static_cast<double>(count) / static_cast<double>(cand.pixels.size());
          } else {
            fraction = static_cast<double>(pixels_near(kept, cand)) /
                       static_cast<double>(kept.pixels.size());
          }
          if (fraction >= 0.5) {
            duplicate = true;
            break;
          }
        }
      }
      if (duplicate) continue;
      cand.id = static_cast<int>(graph.segments.size());
      cand.mean_thickness = mean_thickness(cand, chamfer);
      const auto inside = std::count_if(cand.pixels.begin(), cand.pixels.end(),
                                        [&](Pixel p) { return cup.contains(p); });
      cand.in_cup = 2 * static_cast<std::size_t>(inside) >= cand.pixels.size();
      graph.segments.push_back(std::move(cand));
      segment_layer.push_back(static_cast<int>(layer));
    }
    // retained segments of this layer only shadow lower thresholds
    for (std::size_t i = first_new; i < graph.segments.size(); ++i) retained_near.add(graph.segments[i]);
  }

  // keypoints: all of the first layer, plus new endpoints from lower layers
  std::map<Pixel, int> key_at;
  std::vector<int> key_layer;
  const auto add_key = [&](const KeyPoint& k, int layer) {
    key_at[k.position] = static_cast<int>(graph.keypoints.size());
    graph.keypoints.push_back(k);
    key_layer.push_back(layer);
    graph.adjacency.emplace_back();
    return static_cast<int>(graph.keypoints.size()) - 1;
  };
  if (!layer_keys.empty()) {
    for (const KeyPoint& k : layer_keys[0]) add_key(k, 0);
  }

  for (Segment& seg : graph.segments) {
    if (seg.closed) continue;
    const int layer = segment_layer[static_cast<std::size_t>(seg.id)];
    for (End e : {End::start, End::end}) {
      const Pixel pos = seg.endpoint(e);
      int key = -1;
      if (auto it = key_at.find(pos); it != key_at.end()) {
        key = it->second;
      } else if (layer > 0) {
        int best_dist = kEndpointSnap + 1;
        for (std::size_t k = 0; k < graph.keypoints.size(); ++k) {
          if (key_layer[k] == layer) continue;
          const int d = chebyshev(graph.keypoints[k].position, pos);
          if (d < best_dist) {
            best_dist = d;
            key = static_cast<int>(k);
          }
        }
      }
      if (key < 0) {
        const auto& lk = layer_keys[static_cast<std::size_t>(layer)];
        const auto it = std::find_if(lk.begin(), lk.end(), [&](const KeyPoint& k) { return k.position == pos; });
        const KeyPoint kp = it != lk.end() ? *it : KeyPoint{pos, KeyPointKind::terminal, seg.source_threshold};
        key = add_key(kp, layer);
      }
      graph.adjacency[static_cast<std::size_t>(key)].push_back({seg.id, e});
    }
  }

  for (std::size_t i = 0; i < graph.keypoints.size(); ++i) {
    const Pixel p = graph.keypoints[i].position;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const auto it = key_at.find({p.x + dx, p.y + dy});
        if (it == key_at.end()) continue;
        const auto j = static_cast<std::size_t>(it->second);
        if (j > i && key_layer[j] == key_layer[i]) {
          graph.keypoint_links.emplace_back(static_cast<int>(i), static_cast<int>(j));
        }
      }
    }
  }
  std::sort(graph.keypoint_links.begin(), graph.keypoint_links.end());
  return graph;
}

}  // namespace avr

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "avrefine/grid.hpp"
#include "avrefine/raster.hpp"
#include "avrefine/skeleton.hpp"

namespace avr {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const;
  Vec2 operator-() const { return {-x, -y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

enum class KeyPointKind : std::uint8_t { crossing, terminal };

struct KeyPoint {
  Pixel position;
  KeyPointKind kind = KeyPointKind::terminal;
  double source_threshold = 0.0;

  friend bool operator==(const KeyPoint&, const KeyPoint&) = default;
};

enum class End : std::uint8_t { start = 0, end = 1 };

struct Segment {
  int id = 0;
  std::vector<Pixel> pixels;       // ordered chain, front/back are the endpoints
  std::array<Vec2, 2> tangents{};  // unit, pointing from each endpoint into the chain
  double mean_thickness = 0.0;
  double confidence = 0.0;  // positive means artery
  bool in_cup = false;
  bool closed = false;  // isolated cycle with no keypoint
  double source_threshold = 0.0;

  Pixel endpoint(End e) const { return e == End::start ? pixels.front() : pixels.back(); }
  const Vec2& tangent(End e) const { return tangents[static_cast<std::size_t>(e)]; }
};

struct CupRegion {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;

  bool contains(Pixel p) const;
  friend bool operator==(const CupRegion&, const CupRegion&) = default;
};

struct Incidence {
  int segment = 0;
  End end = End::start;
  friend bool operator==(const Incidence&, const Incidence&) = default;
};

struct VesselGraph {
  int width = 0;
  int height = 0;
  std::vector<Segment> segments;
  std::vector<KeyPoint> keypoints;
  // adjacency[k] lists segment endpoints attached to keypoints[k]
  std::vector<std::vector<Incidence>> adjacency;
  // pairs of 8-adjacent keypoints (i < j); such pairs bound no segment
  std::vector<std::pair<int, int>> keypoint_links;
};

/// Chains shorter than this are dropped as thinning artifacts.
inline constexpr std::size_t kMinSegmentPixels = 3;
/// Cross-threshold endpoint-to-keypoint snapping distance (Chebyshev, px).
inline constexpr int kEndpointSnap = 2;

/// Crossing: more than two skeletal 8-neighbors. Terminal: at most one.
/// Returned in row-major order.
std::vector<KeyPoint> find_keypoints(const SkeletonMap& skeleton);

/// Walks every maximal chain between keypoints plus every isolated cycle.
/// Segments get ids in discovery order, tangents, and the skeleton's
/// threshold; thickness, confidence and cup flags are left at zero.
std::vector<Segment> extract_segments(const SkeletonMap& skeleton, std::span<const KeyPoint> keypoints);

/// Unit vector from the endpoint toward the fifth chain pixel after it (or the
/// farthest pixel of chains that are too short). Throws std::invalid_argument
/// for single-pixel segments.
Vec2 endpoint_tangent(const Segment& seg, End end);

/// Mean full width along the skeleton pixels of `seg`, measured in `support`.
double mean_thickness(const Segment& seg, const BinaryMap& support);
double mean_thickness(const Segment& seg, const Grid<std::int32_t>& chamfer);

/// Fuses per-threshold segments into one graph. `support` is the vessel
/// mask used for thickness (normally the lowest-threshold binarization).
/// A lower-threshold segment is dropped when at least half of the shorter of
/// it and some retained segment lies within 1 px of the other.
VesselGraph build_graph(std::span<const SkeletonMap> skeletons, const BinaryMap& support,
                        const CupRegion& cup);

/// Principal angle between two vectors in degrees, in [0, 180].
double angle_degrees(const Vec2& a, const Vec2& b);

}  // namespace avr

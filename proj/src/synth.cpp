#include "avrefine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "avrefine/errors.hpp"

namespace avr {

void SynthSpec::validate() const {
  if (width < 64 || height < 64) throw ConfigError("synthetic canvas must be at least 64x64");
  const double side = std::min(width, height);
  if (tree_count < 1 || tree_count > 32) throw ConfigError("tree_count must lie in [1, 32]");
  if (branch_depth < 0 || branch_depth > 6) throw ConfigError("branch_depth must lie in [0, 6]");
  if (!(min_width >= 1.0 && max_width >= min_width)) throw ConfigError("width range must satisfy 1 <= min <= max");
  if (max_width > side / 8.0) throw ConfigError("max_width is too large for the canvas");
  if (!(noise_flip_prob >= 0.0 && noise_flip_prob <= 1.0)) throw ConfigError("noise_flip_prob must lie in [0,1]");
  if (!(confidence_contrast > 0.0 && confidence_contrast <= 1.0)) {
    throw ConfigError("confidence_contrast must lie in (0,1]");
  }
  if (!(cup_radius >= 0.0) || cup_radius + max_width + 16.0 > side / 2.0) {
    throw ConfigError("cup region leaves no room for vessel trees");
  }
}

CupRegion SynthSpec::cup() const {
  return {static_cast<double>(width - 1) / 2.0, static_cast<double>(height - 1) / 2.0, cup_radius};
}

nlohmann::ordered_json to_json(const SynthSpec& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["width"] = s.width;
  j["height"] = s.height;
  j["tree_count"] = s.tree_count;
  j["branch_depth"] = s.branch_depth;
  j["width_range"] = {s.min_width, s.max_width};
  j["noise_flip_prob"] = s.noise_flip_prob;
  j["confidence_contrast"] = s.confidence_contrast;
  j["cup_radius"] = s.cup_radius;
  return j;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
  static const std::set<std::string> known{"seed",       "width",           "height",
                                           "tree_count", "branch_depth",    "width_range",
                                           "noise_flip_prob", "confidence_contrast", "cup_radius"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown synth spec key: " + key);
  }
  SynthSpec s;
  try {
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("width")) s.width = j.at("width").get<int>();
    if (j.contains("height")) s.height = j.at("height").get<int>();
    if (j.contains("tree_count")) s.tree_count = j.at("tree_count").get<int>();
    if (j.contains("branch_depth")) s.branch_depth = j.at("branch_depth").get<int>();
    if (j.contains("width_range")) {
      const auto range = j.at("width_range").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("width_range must be [min, max]");
      s.min_width = range[0];
      s.max_width = range[1];
    }
    if (j.contains("noise_flip_prob")) s.noise_flip_prob = j.at("noise_flip_prob").get<double>();
    if (j.contains("confidence_contrast")) s.confidence_contrast = j.at("confidence_contrast").get<double>();
    if (j.contains("cup_radius")) s.cup_radius = j.at("cup_radius").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

class TreePainter {
 public:
  TreePainter(const SynthSpec& spec, SplitMix64& rng, BinaryMap& mask, const BinaryMap& taken)
      : spec_(spec), rng_(rng), mask_(mask), taken_(taken), cup_(spec.cup()) {}

  void grow(double x, double y, double dir, double width, int level) {
    constexpr double kStep = 1.5;
    const double side = std::min(spec_.width, spec_.height);
    const double length = rng_.uniform(0.22, 0.35) * side * std::pow(0.7, level);
    const int steps = static_cast<int>(length / kStep);
    const double r = width / 2.0;
    bool blocked = false;
    for (int s = 0; s < steps; ++s) {
      dir += rng_.uniform(-0.06, 0.06);
      const double nx = x + kStep * std::cos(dir);
      const double ny = y + kStep * std::sin(dir);
      const double margin = r + 2.0;
      const double dcx = nx - cup_.center_x;
      const double dcy = ny - cup_.center_y;
      if (nx < margin || ny < margin || nx > spec_.width - 1 - margin || ny > spec_.height - 1 - margin ||
          std::hypot(dcx, dcy) <= cup_.radius + r + 1.0 || near_other_tree(nx, ny, r + kClearance)) {
        blocked = true;
        break;
      }
      x = nx;
      y = ny;
      stamp(x, y, r);
    }
    if (blocked || level >= spec_.branch_depth) return;
    const double child_width = std::max(spec_.min_width, width * 0.8);
    const double spread = rng_.uniform(0.35, 0.7);
    const double skew = rng_.uniform(-0.15, 0.15);
    grow(x, y, dir + spread + skew, child_width, level + 1);
    grow(x, y, dir - spread + skew, child_width, level + 1);
  }

 private:
  static constexpr double kClearance = 4.0;

  bool near_other_tree(double cx, double cy, double r) const {
    const int x0 = static_cast<int>(std::floor(cx - r));
    const int x1 = static_cast<int>(std::ceil(cx + r));
    const int y0 = static_cast<int>(std::floor(cy - r));
    const int y1 = static_cast<int>(std::ceil(cy + r));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!taken_.contains(x, y) || !taken_(x, y)) continue;
        const double dx = x - cx;
        const double dy = y - cy;
        if (dx * dx + dy * dy <= r * r) return true;
      }
    }
    return false;
  }

  void stamp(double cx, double cy, double r) {
    const int x0 = static_cast<int>(std::floor(cx - r));
    const int x1 = static_cast<int>(std::ceil(cx + r));
    const int y0 = static_cast<int>(std::floor(cy - r));
    const int y1 = static_cast<int>(std::ceil(cy + r));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!mask_.contains(x, y)) continue;
        const double dx = x - cx;
        const double dy = y - cy;
        if (dx * dx + dy * dy <= r * r) mask_(x, y) = 1;
      }
    }
  }

  const SynthSpec& spec_;
  SplitMix64& rng_;
  BinaryMap& mask_;
  const BinaryMap& taken_;
  CupRegion cup_;
};

}  // namespace

SynthSample generate(const SynthSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  SplitMix64 tree_rng = rng.split();
  SplitMix64 pixel_rng = rng.split();

  const int w = spec.width;
  const int h = spec.height;
  const CupRegion cup = spec.cup();
  LabelMap truth(w, h, Label::background);
  const bool artery_first = tree_rng.bernoulli(0.5);
  BinaryMap taken(w, h);

  for (int t = 0; t < spec.tree_count; ++t) {
    BinaryMap mask(w, h);
    TreePainter painter(spec, tree_rng, mask, taken);
    const double theta = 2.0 * std::numbers::pi * (t + tree_rng.uniform(0.2, 0.8)) / spec.tree_count;
    const double start_r = cup.radius + spec.max_width / 2.0 + 2.0;
    const double trunk_width = spec.max_width * tree_rng.uniform(0.85, 1.0);
    painter.grow(cup.center_x + start_r * std::cos(theta), cup.center_y + start_r * std::sin(theta), theta,
                 trunk_width, 0);
    const Label label = ((t % 2 == 0) == artery_first) ? Label::artery : Label::vein;
    auto dst = truth.values();
    auto src = mask.values();
    auto occupied = taken.values();
    for (std::size_t k = 0; k < dst.size(); ++k) {
      if (!src[k] || occupied[k]) continue;
      dst[k] = label;
      occupied[k] = 1;
    }
  }

  SynthSample out{{RealGrid(w, h), RealGrid(w, h), RealGrid(w, h)}, truth, BinaryMap(w, h)};
  const float high = static_cast<float>(0.5 + spec.confidence_contrast / 2.0);
  const float low = static_cast<float>(0.5 - spec.confidence_contrast / 2.0);
  const auto labels = truth.values();
  auto vessel = out.maps.vessel.values();
  auto artery = out.maps.artery.values();
  auto vein = out.maps.vein.values();
  auto vessel_truth = out.vessel_truth.values();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto jitter = static_cast<float>(pixel_rng.uniform(0.0, 0.05));
    if (labels[k] == Label::background) {
      vessel[k] = jitter;
      continue;
    }
    vessel_truth[k] = 1;
    vessel[k] = 1.0f - jitter;
    bool is_artery = labels[k] == Label::artery;
    if (pixel_rng.bernoulli(spec.noise_flip_prob)) is_artery = !is_artery;
    artery[k] = is_artery ? high : low;
    vein[k] = is_artery ? low : high;
  }
  return out;
}

ChainInstance chain_instance(int n_segments, std::span<const int> wrong, double wrong_confidence) {
  if (n_segments < 2 || n_segments > 64) throw std::invalid_argument("chain length must lie in [2, 64]");
  const std::set<int> wrong_set(wrong.begin(), wrong.end());
  if (wrong_set.size() != wrong.size()) throw std::invalid_argument("duplicate wrong index");
  for (int i : wrong_set) {
    if (i < 0 || i >= n_segments) throw std::invalid_argument("wrong index out of range");
  }
  if (static_cast<int>(wrong_set.size()) >= n_segments) {
    throw std::invalid_argument("at least one segment must carry the correct label");
  }

  constexpr int kLength = 10;
  constexpr int kMargin = 2;
  constexpr int kRow = 4;
  ChainInstance out;
  VesselGraph& g = out.graph;
  g.width = (kLength - 1) * n_segments + 1 + 2 * kMargin;
  g.height = 2 * kRow + 1;

  for (int k = 0; k <= n_segments; ++k) {
    const bool end = k == 0 || k == n_segments;
    g.keypoints.push_back({{kMargin + (kLength - 1) * k, kRow}, end ? KeyPointKind::terminal : KeyPointKind::crossing, 0.0});
    g.adjacency.emplace_back();
  }
  for (int k = 0; k < n_segments; ++k) {
    Segment seg;
    seg.id = k;
    for (int t = 0; t < kLength; ++t) seg.pixels.push_back({kMargin + (kLength - 1) * k + t, kRow});
    seg.tangents = {endpoint_tangent(seg, End::start), endpoint_tangent(seg, End::end)};
    seg.mean_thickness = 2.0;
    seg.confidence = wrong_set.contains(k) ? -wrong_confidence : 1.0;
    g.adjacency[static_cast<std::size_t>(k)].push_back({k, End::start});
    g.adjacency[static_cast<std::size_t>(k + 1)].push_back({k, End::end});
    g.segments.push_back(std::move(seg));
    out.expected.push_back(Label::artery);
  }
  return out;
}

}  // namespace avr

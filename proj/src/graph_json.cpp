#include <cmath>

#include "avrefine/pipeline.hpp"

namespace avr {

namespace {

const char* kind_name(KeyPointKind k) { return k == KeyPointKind::crossing ? "crossing" : "terminal"; }

}  // namespace

nlohmann::ordered_json graph_to_json(const VesselGraph& graph, const std::string& config_digest) {
  nlohmann::ordered_json j;
  j["width"] = graph.width;
  j["height"] = graph.height;
  j["config_digest"] = config_digest;

  auto& keypoints = j["keypoints"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < graph.keypoints.size(); ++k) {
    const KeyPoint& kp = graph.keypoints[k];
    nlohmann::ordered_json incident = nlohmann::ordered_json::array();
    if (k < graph.adjacency.size()) {
      for (const Incidence& inc : graph.adjacency[k]) {
        incident.push_back({inc.segment, inc.end == End::start ? "start" : "end"});
      }
    }
    keypoints.push_back({{"x", kp.position.x},
                         {"y", kp.position.y},
                         {"kind", kind_name(kp.kind)},
                         {"source_threshold", kp.source_threshold},
                         {"segments", std::move(incident)}});
  }

  auto& segments = j["segments"] = nlohmann::ordered_json::array();
  for (const Segment& seg : graph.segments) {
    nlohmann::ordered_json pixels = nlohmann::ordered_json::array();
    for (const Pixel p : seg.pixels) pixels.push_back({p.x, p.y});
    segments.push_back({{"id", seg.id},
                        {"pixels", std::move(pixels)},
                        {"mean_thickness", seg.mean_thickness},
                        {"confidence", seg.confidence},
                        {"in_cup", seg.in_cup},
                        {"closed", seg.closed},
                        {"source_threshold", seg.source_threshold},
                        {"tangents",
                         {{"start", {seg.tangents[0].x, seg.tangents[0].y}},
                          {"end", {seg.tangents[1].x, seg.tangents[1].y}}}}});
  }
  return j;
}

RgbImage render_graph(const VesselGraph& graph, const CupRegion& cup) {
  RgbImage img{graph.width, graph.height, {}};
  img.rgb.assign(static_cast<std::size_t>(graph.width) * static_cast<std::size_t>(graph.height) * 3, 0);
  const auto put = [&](int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= graph.width || y >= graph.height) return;
    const std::size_t k = (static_cast<std::size_t>(y) * static_cast<std::size_t>(graph.width) +
                           static_cast<std::size_t>(x)) * 3;
    img.rgb[k] = r;
    img.rgb[k + 1] = g;
    img.rgb[k + 2] = b;
  };
  for (const Segment& seg : graph.segments) {
    for (const Pixel p : seg.pixels) put(p.x, p.y, 255, 255, 255);
  }
  if (cup.radius > 0.0) {
    const int steps = std::max(16, static_cast<int>(cup.radius * 8.0));
    for (int s = 0; s < steps; ++s) {
      const double t = 2.0 * M_PI * s / steps;
      put(static_cast<int>(std::lround(cup.center_x + cup.radius * std::cos(t))),
          static_cast<int>(std::lround(cup.center_y + cup.radius * std::sin(t))), 255, 0, 255);
    }
  }
  const int cx = static_cast<int>(std::lround(cup.center_x));
  const int cy = static_cast<int>(std::lround(cup.center_y));
  for (int d = -1; d <= 1; ++d) {
    put(cx + d, cy, 255, 0, 255);
    put(cx, cy + d, 255, 0, 255);
  }
  for (const KeyPoint& kp : graph.keypoints) {
    if (kp.kind == KeyPointKind::crossing) {
      put(kp.position.x, kp.position.y, 0, 0, 255);
    } else {
      put(kp.position.x, kp.position.y, 255, 255, 0);
    }
  }
  return img;
}

nlohmann::ordered_json trace_to_json(const PropagationTrace& trace) {
  auto end_name = [](End e) { return e == End::start ? "start" : "end"; };
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const PropagationStep& s : trace.steps) {
    steps.push_back({{"iteration", s.iteration},
                     {"segment", s.segment},
                     {"segment_end", end_name(s.segment_end)},
                     {"source", s.source},
                     {"source_end", end_name(s.source_end)},
                     {"epsilon", s.epsilon},
                     {"before", s.before},
                     {"after", s.after}});
  }
  return steps;
}

}  // namespace avr

#include "avrefine/refine.hpp"

#include <algorithm>
#include <cmath>

#include "avrefine/kernels.hpp"

namespace avr {

VesselGraph unify_labels(VesselGraph graph, const ProbabilityMaps& maps) {
  for (Segment& seg : graph.segments) {
    double sum = 0.0;
    for (const Pixel p : seg.pixels) {
      sum += static_cast<double>(maps.artery[p]) - static_cast<double>(maps.vein[p]);
    }
    seg.confidence = sum;
  }
  return graph;
}

double normalize_term(double x, double max_value) {
  const double c = std::clamp(x, 0.0, max_value);
  const double r = (c - max_value) / max_value;
  return r * r;
}

CoefficientTerms coefficient_terms(const Segment& si, End ei, const Segment& sj, End ej,
                                   const RefineConfig& cfg) {
  const Vec2& ui = si.tangent(ei);
  const Vec2& uj = sj.tangent(ej);
  const Pixel pi = si.endpoint(ei);
  const Pixel pj = sj.endpoint(ej);
  const Vec2 gap{static_cast<double>(pj.x - pi.x), static_cast<double>(pj.y - pi.y)};
  const double dist = gap.norm();

  CoefficientTerms t;
  t.angle = normalize_term(std::abs(angle_degrees(ui, uj) - 180.0), cfg.max_angle_deg);
  t.line = dist == 0.0 ? 1.0 : normalize_term(angle_degrees(-ui, gap), cfg.max_line_angle_deg);
  t.thickness = normalize_term(std::abs(si.mean_thickness - sj.mean_thickness), cfg.max_thickness_px);
  t.distance = normalize_term(dist, cfg.max_distance_px);
  return t;
}

double coefficient(const Segment& si, End ei, const Segment& sj, End ej, const RefineConfig& cfg) {
  return coefficient_terms(si, ei, sj, ej, cfg).epsilon();
}

namespace {

double endpoint_gap(const Segment& a, const Segment& b) {
  double best = INFINITY;
  for (End ea : {End::start, End::end}) {
    for (End eb : {End::start, End::end}) {
      const Pixel p = a.endpoint(ea);
      const Pixel q = b.endpoint(eb);
      best = std::min(best, std::hypot(static_cast<double>(p.x - q.x), static_cast<double>(p.y - q.y)));
    }
  }
  return best;
}

struct Link {
  int source;
  End segment_end;
  End source_end;
  double epsilon;
};

}  // namespace

std::vector<int> propagation_candidates(const VesselGraph& graph, int seg, const RefineConfig& cfg) {
  std::vector<int> out;
  const Segment& si = graph.segments[static_cast<std::size_t>(seg)];
  for (const Segment& sj : graph.segments) {
    if (sj.id == seg) continue;
    if (endpoint_gap(si, sj) <= cfg.max_distance_px) out.push_back(sj.id);
  }
  return out;
}

PropagationResult propagate(VesselGraph graph, const RefineConfig& cfg) {
  cfg.validate();
  PropagationResult result;
  auto& segs = graph.segments;

  // the coefficients depend on geometry only, so they are fixed across rounds
  std::vector<std::vector<Link>> links(segs.size());
  for (const Segment& si : segs) {
    if (si.in_cup || cfg.iterations == 0) continue;
    for (int j : propagation_candidates(graph, si.id, cfg)) {
      const Segment& sj = segs[static_cast<std::size_t>(j)];
      for (End ei : {End::start, End::end}) {
        for (End ej : {End::start, End::end}) {
          const double eps = coefficient(si, ei, sj, ej, cfg);
          if (eps > 0.0) links[static_cast<std::size_t>(si.id)].push_back({j, ei, ej, eps});
        }
      }
    }
  }

  for (int round = 0; round < cfg.iterations; ++round) {
    for (Segment& si : segs) {
      if (si.in_cup) continue;
      for (const Link& link : links[static_cast<std::size_t>(si.id)]) {
        const double before = si.confidence;
        si.confidence += link.epsilon * segs[static_cast<std::size_t>(link.source)].confidence;
        result.trace.steps.push_back(
            {round, si.id, before, si.confidence, link.source, link.segment_end, link.source_end, link.epsilon});
      }
    }
  }
  result.graph = std::move(graph);
  return result;
}

LabelMap argmax_labels(const ProbabilityMaps& maps, const BinaryMap& support) {
  LabelMap labels(maps.width(), maps.height(), Label::background);
  const auto a = maps.artery.values();
  const auto v = maps.vein.values();
  const auto s = support.values();
  auto out = labels.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (s[k]) out[k] = a[k] >= v[k] ? Label::artery : Label::vein;
  }
  return labels;
}

LabelMap synthesize_labels(const VesselGraph& graph, const ProbabilityMaps& maps, const RefineConfig& cfg) {
  const BinaryMap support = binarize(maps.vessel, cfg.thresholds.front());
  Grid<std::int32_t> owner(maps.width(), maps.height(), -1);
  for (const Segment& seg : graph.segments) {
    for (const Pixel p : seg.pixels) {
      if (owner.contains(p) && owner[p] < 0) owner[p] = seg.id;
    }
  }
  Grid<std::int32_t> nearest(maps.width(), maps.height(), -1);
  const int radius = static_cast<int>(std::floor(cfg.max_thickness_px));
  kernels::omp::nearest_owner(owner, support, radius, nearest);

  LabelMap labels = argmax_labels(maps, support);
  auto out = labels.values();
  const auto near = nearest.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (near[k] >= 0) out[k] = segment_label(graph.segments[static_cast<std::size_t>(near[k])].confidence);
  }
  return labels;
}

}  // namespace avr

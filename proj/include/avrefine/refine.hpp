#pragma once

#include <vector>

#include "avrefine/config.hpp"
#include "avrefine/raster.hpp"
#include "avrefine/vessel_graph.hpp"

namespace avr {

/// Positive confidence is artery; zero ties to artery.
inline Label segment_label(double confidence) { return confidence >= 0.0 ? Label::artery : Label::vein; }

/// Sets every segment's confidence to the sum of (artery - vein) over its
/// skeleton pixels.
VesselGraph unify_labels(VesselGraph graph, const ProbabilityMaps& maps);

/// ((clamp(x, 0, m) - m) / m)^2: 1 at x = 0, falling to 0 at x >= m.
double normalize_term(double x, double max_value);

struct CoefficientTerms {
  double angle = 0.0;      // A: tangents pointing in opposite directions
  double line = 0.0;       // L: the other endpoint lies ahead along this tangent
  double thickness = 0.0;  // T: similar mean width
  double distance = 0.0;   // D: nearby endpoints

  double epsilon() const { return angle * line * thickness * distance; }
};

/// Influence of segment `sj` (at endpoint `ej`) on `si` (at endpoint `ei`).
///
/// The collinearity angle is measured from the outward direction at `ei`
/// (the negated inward tangent) to the vector toward `ej`, so a segment that
/// continues `si` across a gap scores 1. Coincident endpoints give L = D = 1.
CoefficientTerms coefficient_terms(const Segment& si, End ei, const Segment& sj, End ej,
                                   const RefineConfig& cfg);
double coefficient(const Segment& si, End ei, const Segment& sj, End ej, const RefineConfig& cfg);

struct PropagationStep {
  int iteration = 0;
  int segment = 0;
  double before = 0.0;
  double after = 0.0;
  int source = 0;
  End segment_end = End::start;
  End source_end = End::start;
  double epsilon = 0.0;
};

struct PropagationTrace {
  std::vector<PropagationStep> steps;  // only updates with epsilon > 0
};

struct PropagationResult {
  VesselGraph graph;
  PropagationTrace trace;
};

/// Segments with an endpoint within m_D of one of `seg`'s endpoints, ascending.
std::vector<int> propagation_candidates(const VesselGraph& graph, int seg, const RefineConfig& cfg);

/// Runs cfg.iterations rounds. Each round visits non-cup segments in id order
/// and, for each candidate neighbor and each of the four endpoint pairings,
/// applies c_i += epsilon * c_j in place.
PropagationResult propagate(VesselGraph graph, const RefineConfig& cfg);

/// Raw per-pixel decision inside `support`: artery when o_artery >= o_vein.
LabelMap argmax_labels(const ProbabilityMaps& maps, const BinaryMap& support);

/// Paints segment labels back onto the vessel support (binarized at the first
/// threshold): each pixel takes the label of the nearest skeleton pixel in
/// Chebyshev distance (ties to the lower segment id). Pixels farther than m_T
/// keep their raw argmax label.
LabelMap synthesize_labels(const VesselGraph& graph, const ProbabilityMaps& maps, const RefineConfig& cfg);

}  // namespace avr

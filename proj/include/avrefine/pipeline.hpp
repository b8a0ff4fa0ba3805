#pragma once

#include <string>

#include <json.hpp>

#include "avrefine/config.hpp"
#include "avrefine/image_io.hpp"
#include "avrefine/raster.hpp"
#include "avrefine/refine.hpp"
#include "avrefine/vessel_graph.hpp"

namespace avr {

struct RefineOutput {
  VesselGraph unified;     // after label unification
  VesselGraph propagated;  // after prediction propagation
  PropagationTrace trace;
  LabelMap labels;
};

/// Threshold fusion, graph extraction, unification, propagation and label
/// synthesis in one call.
RefineOutput refine_maps(const ProbabilityMaps& maps, const RefineConfig& cfg);

/// Graph export with a fixed field order.
nlohmann::ordered_json graph_to_json(const VesselGraph& graph, const std::string& config_digest);

/// Propagation steps in the order they were applied.
nlohmann::ordered_json trace_to_json(const PropagationTrace& trace);

/// Skeleton pixels in white, crossings blue, terminals yellow, and the cup
/// center and circle in magenta.
RgbImage render_graph(const VesselGraph& graph, const CupRegion& cup);

}  // namespace avr

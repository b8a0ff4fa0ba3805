#include "avrefine/pipeline.hpp"

#include "avrefine/skeleton.hpp"

namespace avr {

RefineOutput refine_maps(const ProbabilityMaps& maps, const RefineConfig& cfg) {
  cfg.validate();
  maps.validate(1.0);  // shapes and ranges; the softmax sum is checked at load time
  const std::vector<SkeletonMap> skeletons = fuse_multiscale(maps.vessel, cfg.thresholds);
  const BinaryMap support = binarize(maps.vessel, cfg.thresholds.back());

  RefineOutput out;
  out.unified = unify_labels(build_graph(skeletons, support, cfg.cup), maps);
  PropagationResult propagated = propagate(out.unified, cfg);
  out.propagated = std::move(propagated.graph);
  out.trace = std::move(propagated.trace);
  out.labels = synthesize_labels(out.propagated, maps, cfg);
  return out;
}

}  // namespace avr

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "avrefine/raster.hpp"
#include "avrefine/vessel_graph.hpp"

namespace avr {

/// SplitMix64. Small, fast, and fully specified by its published outputs,
/// which keeps synthetic fixtures identical across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream.
  SplitMix64 split() { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

struct SynthSpec {
  std::uint64_t seed = 42;
  int width = 256;
  int height = 256;
  int tree_count = 4;
  int branch_depth = 3;
  double min_width = 2.0;  // vessel width range, pixels
  double max_width = 6.0;
  double noise_flip_prob = 0.0;
  double confidence_contrast = 0.4;
  double cup_radius = 12.0;  // cup sits at the canvas center; trees grow outward from it

  /// Throws ConfigError when the trees cannot fit the canvas or a value is out of range.
  void validate() const;
  CupRegion cup() const;
};

nlohmann::ordered_json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SynthSample {
  ProbabilityMaps maps;
  LabelMap truth;
  BinaryMap vessel_truth;
};

/// Renders random branching trees, each entirely artery or vein and kept a few
/// pixels apart from the others, then flips the artery/vein preference of
/// each vessel pixel with noise_flip_prob.
SynthSample generate(const SynthSpec& spec);

struct ChainInstance {
  VesselGraph graph;
  std::vector<Label> expected;
};

/// n collinear 10-pixel segments touching end to end. Segments listed in
/// `wrong` carry -wrong_confidence, the rest +1; the expected label of every
/// segment is artery. Throws std::invalid_argument unless 2 <= n <= 64, the
/// indices are distinct and in range, and at least one segment is correct.
ChainInstance chain_instance(int n_segments, std::span<const int> wrong, double wrong_confidence);

}  // namespace avr

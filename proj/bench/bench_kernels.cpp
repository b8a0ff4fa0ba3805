#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include <omp.h>

#include "avrefine/kernels.hpp"
#include "avrefine/metrics.hpp"
#include "avrefine/pipeline.hpp"
#include "avrefine/refine.hpp"
#include "avrefine/synth.hpp"

using namespace avr;

namespace {

// Best of `reps` wall-clock runs, in milliseconds.
double best_ms(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-18s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int side = argc > 1 ? std::atoi(argv[1]) : 1024;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

  SynthSpec spec;
  spec.width = spec.height = side;
  spec.max_width = 8.0;
  spec.cup_radius = side / 16.0;
  spec.noise_flip_prob = 0.2;
  const SynthSample s = generate(spec);
  std::printf("canvas %dx%d, %d threads, best of %d\n", side, side, omp_get_max_threads(), reps);

  std::vector<std::uint8_t> bits_a(s.maps.vessel.size()), bits_b(s.maps.vessel.size());
  report("binarize",
         best_ms(reps, [&] { kernels::serial::binarize(s.maps.vessel.values(), 0.3, bits_a); }),
         best_ms(reps, [&] { kernels::omp::binarize(s.maps.vessel.values(), 0.3, bits_b); }));

  const BinaryMap vessel = binarize(s.maps.vessel, 0.3);
  BinaryMap marks(side, side);
  report("zhang_suen_mark",
         best_ms(reps, [&] { kernels::serial::zhang_suen_mark(vessel, 0, marks); }),
         best_ms(reps, [&] { kernels::omp::zhang_suen_mark(vessel, 0, marks); }));

  // sparse owners on the skeleton, as during label synthesis
  Grid<std::int32_t> owner(side, side, -1), nearest(side, side);
  const BinaryMap skeleton = centerline_mask(vessel);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      if (skeleton(x, y)) owner(x, y) = (x / 32 + y / 32) % 97;
  report("nearest_owner",
         best_ms(reps, [&] { kernels::serial::nearest_owner(owner, vessel, 5, nearest); }),
         best_ms(reps, [&] { kernels::omp::nearest_owner(owner, vessel, 5, nearest); }));

  const LabelMap raw = argmax_labels(s.maps, vessel);
  report("confusion",
         best_ms(reps, [&] { kernels::serial::confusion(raw.values(), s.truth.values(), vessel.values()); }),
         best_ms(reps, [&] { kernels::omp::confusion(raw.values(), s.truth.values(), vessel.values()); }));

  RefineConfig cfg;
  cfg.cup = spec.cup();
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const double one = best_ms(reps, [&] { refine_maps(s.maps, cfg); });
  omp_set_num_threads(threads);
  const double all = best_ms(reps, [&] { refine_maps(s.maps, cfg); });
  report("refine_maps", one, all);
  return 0;
}

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "avrefine/config.hpp"
#include "avrefine/image_io.hpp"
#include "avrefine/metrics.hpp"
#include "avrefine/pipeline.hpp"
#include "avrefine/refine.hpp"
#include "avrefine/skeleton.hpp"
#include "avrefine/synth.hpp"
#include "cli_support.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace avr;
using cli::quote;
namespace fs = std::filesystem;

namespace {

// Mean centerline accuracy over seeds 1..50 at noise 0.2, contrast 0.4,
// measured once and frozen.
constexpr double kGoldenRaw = 0.800243;
constexpr double kGoldenUnified = 0.999335;
constexpr double kGoldenPropagated = 1.000000;
constexpr double kGoldenTolerance = 0.002;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < limit_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("%s  %s  [%s; %.2f s of %.0f s]\n", pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s, limit_s);
  std::fflush(stdout);
}

Outcome improvement() {
  double raw = 0.0, unified = 0.0, propagated = 0.0;
  const int n = 50;
  for (int seed = 1; seed <= n; ++seed) {
    SynthSpec spec;
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.noise_flip_prob = 0.2;
    spec.confidence_contrast = 0.4;
    const SynthSample s = generate(spec);
    RefineConfig cfg;
    cfg.cup = spec.cup();
    const RefineOutput out = refine_maps(s.maps, cfg);
    const BinaryMap support = binarize(s.maps.vessel, cfg.thresholds.front());
    raw += evaluate(argmax_labels(s.maps, support), s.truth, s.vessel_truth).center_acc;
    unified += evaluate(synthesize_labels(out.unified, s.maps, cfg), s.truth, s.vessel_truth).center_acc;
    propagated += evaluate(out.labels, s.truth, s.vessel_truth).center_acc;
  }
  raw /= n;
  unified /= n;
  propagated /= n;
  const bool ordered = propagated > raw && unified > raw;
  const bool golden = std::abs(raw - kGoldenRaw) <= kGoldenTolerance &&
                      std::abs(unified - kGoldenUnified) <= kGoldenTolerance &&
                      std::abs(propagated - kGoldenPropagated) <= kGoldenTolerance;
  std::ostringstream d;
  d << "raw " << fmt("%.6f", raw) << ", unified " << fmt("%.6f", unified) << ", propagated "
    << fmt("%.6f", propagated) << (golden ? ", golden match" : ", golden MISMATCH");
  return {ordered && golden, d.str()};
}

Outcome propagation_demo() {
  const ChainInstance chain = chain_instance(6, std::vector<int>{2, 4}, 0.2);
  int corrected_at = -1;
  for (int rounds = 1; rounds <= 5 && corrected_at < 0; ++rounds) {
    RefineConfig cfg;
    cfg.iterations = rounds;
    const PropagationResult r = propagate(chain.graph, cfg);
    bool all = true;
    for (std::size_t i = 0; i < chain.expected.size(); ++i)
      all = all && segment_label(r.graph.segments[i].confidence) == chain.expected[i];
    if (all) corrected_at = rounds;
  }

  // the same chain plus a wrongly labelled segment far from everything
  VesselGraph g = chain.graph;
  Segment lone;
  lone.id = static_cast<int>(g.segments.size());
  for (int t = 0; t < 10; ++t) lone.pixels.push_back({2 + t, 60});
  lone.tangents = {endpoint_tangent(lone, End::start), endpoint_tangent(lone, End::end)};
  lone.mean_thickness = 2.0;
  lone.confidence = -0.2;
  g.segments.push_back(lone);
  g.height = 64;
  RefineConfig cfg;
  const PropagationResult with = propagate(g, cfg);
  const PropagationResult without = propagate(chain.graph, cfg);
  bool untouched = with.graph.segments.back().confidence == -0.2;
  for (std::size_t i = 0; i < without.graph.segments.size(); ++i)
    untouched = untouched && with.graph.segments[i].confidence == without.graph.segments[i].confidence;

  return {corrected_at > 0 && untouched,
          "chain corrected after " + std::to_string(corrected_at) + " iteration(s), isolated segment " +
              (untouched ? "unchanged" : "CHANGED")};
}

SkeletonMap random_skeleton(std::mt19937_64& rng, int trial) {
  const int w = 6 + trial % 27;
  const int h = 6 + (trial * 5) % 27;
  if (trial % 3 == 0) return {oracle::random_bits(rng, w, h, 0.25), 0.5};
  return thin(oracle::random_strokes(rng, w, h, 1 + trial % 5));
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(2024);
  int partitions = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const SkeletonMap s = random_skeleton(rng, trial);
    partitions += oracle::pixel_sets(extract_segments(s, find_keypoints(s))) == oracle::segment_partition(s.bits);
  }

  int aucs = 0;
  double worst_auc = 0.0;
  std::uniform_int_distribution<int> side(1, 16), levels(2, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = side(rng), h = side(rng);
    RealGrid scores = oracle::random_field(rng, w, h);
    if (trial % 2) {
      const int q = levels(rng);
      for (float& v : scores.values()) v = std::floor(v * q) / q;
    }
    const BinaryMap gt = oracle::random_bits(rng, w, h, 0.3);
    const double a = roc_auc(scores, gt);
    const double b = oracle::pairwise_auc(scores.values(), gt.values());
    if (std::isnan(a) && std::isnan(b)) {
      ++aucs;
    } else {
      worst_auc = std::max(worst_auc, std::abs(a - b));
      aucs += std::abs(a - b) <= 1e-12;
    }
  }

  int bars = 0, bar_cases = 0;
  double worst_width = 0.0;
  for (int width = 1; width <= 11; ++width) {
    for (bool diagonal : {false, true}) {
      const int n = 48;
      BinaryMap fg(n, n);
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const double off = diagonal ? (x - y) / std::sqrt(2.0) : (y - n / 2.0 + 0.5);
          const double along = diagonal ? (x + y) / std::sqrt(2.0) : x;
          const bool inside = diagonal ? std::abs(along - n / std::sqrt(2.0)) < n / 3.0 : (x >= 4 && x < n - 4);
          if (std::abs(off) <= width / 2.0 && inside) fg(x, y) = 1;
        }
      }
      Segment seg;
      const BinaryMap sk = thin(fg).bits;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
          if (sk(x, y)) seg.pixels.push_back({x, y});
      const double diff = std::abs(mean_thickness(seg, fg) - oracle::exact_mean_width(seg, fg));
      worst_width = std::max(worst_width, diff);
      bars += diff <= 0.5;
      ++bar_cases;
    }
  }

  std::ostringstream d;
  d << "partitions " << partitions << "/200, AUC " << aucs << "/200 (max diff " << worst_auc << "), thickness "
    << bars << "/" << bar_cases << " (max diff " << fmt("%.3f", worst_width) << " px)";
  return {partitions == 200 && aucs == 200 && bars == bar_cases, d.str()};
}

// A real graph from a small synthetic fixture, before propagation.
VesselGraph sample_graph(std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  spec.width = spec.height = 96;
  spec.max_width = 5.0;
  spec.noise_flip_prob = 0.3;
  spec.cup_radius = 8.0;
  const SynthSample s = generate(spec);
  RefineConfig cfg;
  cfg.cup = spec.cup();
  cfg.iterations = 0;
  return refine_maps(s.maps, cfg).unified;
}

Outcome invariants() {
  std::mt19937_64 rng(99);
  int cases = 0, failed = 0;
  const auto check = [&](bool ok) {
    ++cases;
    failed += !ok;
  };

  std::uniform_real_distribution<double> theta(0.01, 0.99);
  for (int trial = 0; trial < 250; ++trial) {
    const RealGrid v = oracle::random_field(rng, 4 + trial % 21, 4 + (trial * 7) % 21);
    double a = theta(rng), b = theta(rng);
    if (a > b) std::swap(a, b);
    const BinaryMap lo = binarize(v, a), hi = binarize(v, b);
    bool ok = true;
    for (std::size_t k = 0; k < lo.size(); ++k) ok = ok && hi.values()[k] <= lo.values()[k];
    check(ok);
  }

  for (int trial = 0; trial < 250; ++trial) {
    const BinaryMap m = trial % 2 ? oracle::random_bits(rng, 8 + trial % 20, 8 + trial % 17, 0.5)
                                  : oracle::random_strokes(rng, 12 + trial % 25, 12 + trial % 19, 1 + trial % 4);
    const BinaryMap t = thin(m).bits;
    bool subset = true;
    for (std::size_t k = 0; k < m.size(); ++k) subset = subset && t.values()[k] <= m.values()[k];
    check(subset && thin(t).bits == t && oracle::count_components(t) == oracle::count_components(m));
  }

  std::uniform_int_distribution<int> pos(0, 40), step(-1, 1), len(2, 12);
  std::uniform_real_distribution<double> thick(2.0, 9.0), maxv(0.5, 200.0);
  for (int trial = 0; trial < 250; ++trial) {
    Segment s[2];
    for (Segment& seg : s) {
      Pixel p{pos(rng), pos(rng)};
      seg.pixels.push_back(p);
      const int n = len(rng);
      for (int i = 1; i < n; ++i) {
        Pixel q{p.x + step(rng), p.y + step(rng)};
        if (q == p) q.x += 1;
        seg.pixels.push_back(q);
        p = q;
      }
      if (seg.pixels.front() == seg.pixels.back()) seg.pixels.push_back({p.x + 1, p.y});
      seg.tangents = {endpoint_tangent(seg, End::start), endpoint_tangent(seg, End::end)};
      seg.mean_thickness = thick(rng);
    }
    RefineConfig cfg;
    cfg.max_angle_deg = maxv(rng);
    cfg.max_line_angle_deg = maxv(rng);
    cfg.max_thickness_px = maxv(rng) / 20.0;
    cfg.max_distance_px = maxv(rng) / 4.0;
    bool ok = true;
    for (End ei : {End::start, End::end})
      for (End ej : {End::start, End::end}) {
        const double e = coefficient(s[0], ei, s[1], ej, cfg);
        ok = ok && e >= 0.0 && e <= 1.0;
      }
    check(ok);
  }

  std::uniform_real_distribution<double> conf(-20.0, 20.0), lambda(0.05, 8.0);
  std::bernoulli_distribution cup(0.3);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    VesselGraph g = sample_graph(seed);
    for (Segment& s : g.segments) {
      s.confidence = conf(rng);
      s.in_cup = cup(rng);
    }
    RefineConfig cfg;
    const PropagationResult r = propagate(g, cfg);
    bool frozen = true;
    for (std::size_t i = 0; i < g.segments.size(); ++i)
      if (g.segments[i].in_cup) frozen = frozen && r.graph.segments[i].confidence == g.segments[i].confidence;
    check(frozen);

    RefineConfig zero = cfg;
    zero.iterations = 0;
    const PropagationResult z = propagate(g, zero);
    bool identity = z.trace.steps.empty();
    for (std::size_t i = 0; i < g.segments.size(); ++i)
      identity = identity && z.graph.segments[i].confidence == g.segments[i].confidence;
    check(identity);

    const double l = lambda(rng);
    VesselGraph scaled = g, negated = g;
    for (Segment& s : scaled.segments) s.confidence *= l;
    for (Segment& s : negated.segments) s.confidence = -s.confidence;
    const PropagationResult rs = propagate(scaled, cfg), rn = propagate(negated, cfg);
    bool covariant = true;
    for (std::size_t i = 0; i < g.segments.size(); ++i) {
      const double c = r.graph.segments[i].confidence;
      covariant = covariant && std::abs(rs.graph.segments[i].confidence - l * c) <= 1e-9 * (1.0 + std::abs(l * c));
      covariant = covariant && std::abs(rn.graph.segments[i].confidence + c) <= 1e-12 * (1.0 + std::abs(c));
    }
    check(covariant);
  }

  for (int trial = 0; trial < 150; ++trial) {
    const BinaryMap v = trial % 2 ? oracle::random_bits(rng, 24, 24, 0.5) : oracle::random_strokes(rng, 32, 32, 3);
    const BinaryMap c = centerline_mask(v), m = major_centerline_mask(v);
    bool ok = true;
    for (std::size_t k = 0; k < v.size(); ++k) ok = ok && m.values()[k] <= c.values()[k] && c.values()[k] <= v.values()[k];
    check(ok);
  }

  return {cases >= 1000 && failed == 0, std::to_string(cases - failed) + "/" + std::to_string(cases) + " cases hold"};
}

Outcome determinism(const TempDir& t) {
  if (cli::run("synth --quiet --set seed=42 --set noise_flip_prob=0.2 --out " + quote((t / "fixture").string()),
               t / "log") != 0)
    return {false, "synth failed"};
  const std::string base = "refine --quiet " + quote((t / "fixture" / "vessel.pfm").string()) + " " +
                           quote((t / "fixture" / "artery.pfm").string()) + " " +
                           quote((t / "fixture" / "vein.pfm").string()) + " --config " +
                           quote((t / "fixture" / "config.json").string());
  for (const char* run : {"a", "b", "c"}) {
    const std::string jobs = std::string(run) == "c" ? " --jobs 8" : " --jobs 1";
    if (cli::run(base + jobs + " --out " + quote((t / run).string()), t / "log") != 0) return {false, "refine failed"};
  }
  const auto a = cli::snapshot(t / "a");
  const bool same_runs = a == cli::snapshot(t / "b");
  const bool same_jobs = a == cli::snapshot(t / "c");
  return {same_runs && same_jobs && a.size() == 4,
          std::to_string(a.size()) + " files; repeat " + (same_runs ? "identical" : "DIFFERS") + ", --jobs 1 vs 8 " +
              (same_jobs ? "identical" : "DIFFERS") + " (manifest timing excluded)"};
}

Outcome performance(const TempDir& t) {
  if (cli::run("synth --quiet --set width=576 --set height=576 --set noise_flip_prob=0.2 --set tree_count=8 --set 'width_range=[2,8]' --out " +
                   quote((t / "big").string()),
               t / "log") != 0)
    return {false, "synth failed"};
  const std::string args = "refine --quiet --jobs 1 " + quote((t / "big" / "vessel.pfm").string()) + " " +
                           quote((t / "big" / "artery.pfm").string()) + " " + quote((t / "big" / "vein.pfm").string()) +
                           " --config " + quote((t / "big" / "config.json").string()) + " --out " +
                           quote((t / "big_out").string());
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::run(args, t / "log");
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {code == 0 && s < 5.0, "end-to-end CLI run with I/O " + fmt("%.3f", s) + " s"};
}

Outcome eval_columns(const TempDir& t) {
  const fs::path fix = t / "fixture", out = t / "a";
  if (cli::run("eval --json " + quote((out / "labels.png").string()) + " " + quote((fix / "gt.png").string()) + " " +
                   quote((fix / "gt_vessel.png").string()) + " --scores " + quote((fix / "vessel.pfm").string()) +
                   " --out " + quote((t / "eval").string()),
               t / "log") != 0)
    return {false, "eval failed"};
  const auto report = nlohmann::json::parse(cli::read_file(t / "log" / "stdout.txt"))["images"][0]["report"];

  const RealGrid scores = load_probability_map(fix / "vessel.pfm");
  const EvalReport ref = evaluate(load_label_map(out / "labels.png"), load_label_map(fix / "gt.png"),
                                  read_binary_png(fix / "gt_vessel.png"), &scores);
  const std::pair<const char*, double> columns[] = {
      {"full_image_acc", ref.full_image_acc}, {"center_acc", ref.center_acc},
      {"center_f1", ref.center_f1},           {"center2px_acc", ref.center2px_acc},
      {"center2px_f1", ref.center2px_f1},     {"vessel_discovery", ref.vessel_discovery},
      {"segmentation_auc", ref.segmentation_auc}};
  int present = 0;
  for (const auto& [key, value] : columns)
    present += report.contains(key) && report[key].is_number() && report[key].get<double>() == value;
  const bool table = cli::read_file(t / "eval" / "report.txt").find("Center>=2px Acc") != std::string::npos;
  return {present == 7 && table, std::to_string(present) + "/7 metrics defined and equal to the library values"};
}

}  // namespace

int main() {
  TempDir t("acceptance");
  criterion("synthetic improvement: propagated > raw and unified > raw, golden means +-0.002", 60, improvement);
  criterion("propagation demo: chain corrected within 5 iterations, isolated segment unchanged", 1, propagation_demo);
  criterion("oracle equivalence: segment partitions, AUC to 1e-12, thickness within 0.5 px", 30, oracle_equivalence);
  criterion("invariant suite: >= 1000 generated property cases", 60, invariants);
  criterion("determinism: seed-42 refine identical across runs and --jobs 1 vs 8", 60, [&] { return determinism(t); });
  criterion("performance: 576x576 refine under 5 s single-threaded", 60, [&] { return performance(t); });
  criterion("eval computes full-image, center, center>=2px, vessel and AUC columns", 30,
            [&] { return eval_columns(t); });
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

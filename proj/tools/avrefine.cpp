#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "avrefine/config.hpp"
#include "avrefine/errors.hpp"
#include "avrefine/image_io.hpp"
#include "avrefine/metrics.hpp"
#include "avrefine/pipeline.hpp"
#include "avrefine/skeleton.hpp"
#include "avrefine/synth.hpp"
#include "avrefine/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace avr;

namespace {

struct Common {
  fs::path config;
  fs::path out = ".";
  int jobs = 0;
  bool quiet = false;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  if (with_config) cmd->add_option("--config", c.config, "Refinement config (JSON)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--quiet", c.quiet, "Suppress progress output");
  cmd->add_flag("--json", c.json, "Print the run manifest as JSON on stdout");
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

RefineConfig require_config(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  return load_config(c.config);
}

// vessel.pfm is preferred over vessel.png when both exist
fs::path find_channel(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".pfm", ".png"}) {
    const fs::path p = dir / (stem + ext);
    if (fs::exists(p)) return p;
  }
  throw InputError("missing " + (dir / (stem + ".pfm|.png")).string());
}

std::vector<fs::path> batch_items(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> items;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) items.push_back(e.path());
  std::sort(items.begin(), items.end());
  if (items.empty()) throw InputError("no image directories in " + dir.string());
  return items;
}

struct Failure {
  std::string error_class;
  std::string message;
  int code = 0;
};

Failure classify(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const InputError& e) {
    return {"InputError", e.what(), 2};
  } catch (const ConfigError& e) {
    return {"ConfigError", e.what(), 3};
  } catch (const std::exception& e) {
    return {"RuntimeError", e.what(), 1};
  }
}

// Runs one command, recording inputs, outputs, timing and the outcome in
// <out>/manifest.json whether or not the command succeeds.
int run_command(const std::string& name, const Common& c, const std::function<void(json&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  json m;
  m["tool"] = "avrefine";
  m["version"] = kVersion;
  m["command"] = name;
  m["status"] = "ok";
  m["images"] = json::array();
  if (c.jobs > 0) omp_set_num_threads(c.jobs);

  Failure failure;
  try {
    fs::create_directories(c.out);
    body(m);
    if (m.contains("error_class")) failure = {m["error_class"], m["message"], m["exit_code"]};
  } catch (...) {
    failure = classify(std::current_exception());
  }
  if (failure.code != 0) {
    m["status"] = "error";
    m["error_class"] = failure.error_class;
    m["message"] = failure.message;
    m.erase("exit_code");
    std::cerr << "avrefine " << name << ": " << failure.message << "\n";
  }
  m["total_ms"] = elapsed_ms(t0);
  try {
    fs::create_directories(c.out);
    write_text(c.out / "manifest.json", m.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "avrefine " << name << ": cannot write manifest: " << e.what() << "\n";
  }
  if (c.json) std::cout << m.dump(2) << "\n";
  return failure.code;
}

// Batch commands keep going after a failed image; the first failure in name
// order decides the exit code.
void record_batch_failure(json& m, const std::vector<Failure>& failures) {
  for (const Failure& f : failures) {
    if (f.code == 0) continue;
    m["error_class"] = f.error_class;
    m["message"] = f.message;
    m["exit_code"] = f.code;
    return;
  }
}

struct Channels {
  fs::path vessel, artery, vein;
};

json refine_one(const Channels& in, const RefineConfig& cfg, const std::string& digest, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProbabilityMaps maps = load_probability_maps(in.vessel, in.artery, in.vein);
  const RefineOutput r = refine_maps(maps, cfg);
  fs::create_directories(dir);
  save_overlay(r.labels, dir / "overlay.png");
  save_label_map(r.labels, dir / "labels.png");
  json graph = graph_to_json(r.propagated, digest);
  graph["trace"] = trace_to_json(r.trace);
  write_text(dir / "graph.json", graph.dump(1) + "\n");
  return {{"inputs", {{"vessel", in.vessel.string()}, {"artery", in.artery.string()}, {"vein", in.vein.string()}}},
          {"outputs", {"overlay.png", "labels.png", "graph.json"}},
          {"segments", r.propagated.segments.size()},
          {"propagation_steps", r.trace.steps.size()},
          {"elapsed_ms", elapsed_ms(t0)}};
}

int cmd_refine(const Common& c, const std::vector<fs::path>& maps, const fs::path& batch) {
  return run_command("refine", c, [&](json& m) {
    const RefineConfig cfg = require_config(c);
    const std::string digest = config_digest(cfg);
    m["config"] = c.config.string();
    m["config_digest"] = digest;

    if (batch.empty()) {
      if (maps.size() != 3) throw InputError("expected VESSEL ARTERY VEIN maps or --batch DIR");
      json entry = refine_one({maps[0], maps[1], maps[2]}, cfg, digest, c.out);
      entry["name"] = ".";
      m["images"].push_back(entry);
      if (!c.quiet && !c.json) std::cout << "refined " << entry["segments"] << " segments into " << c.out.string() << "\n";
      return;
    }

    const std::vector<fs::path> items = batch_items(batch);
    std::vector<json> entries(items.size());
    std::vector<Failure> failures(items.size());
    const int jobs = c.jobs > 0 ? c.jobs : omp_get_max_threads();
    // images run concurrently; each one is refined by a single thread
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (std::size_t k = 0; k < items.size(); ++k) {
      const std::string name = items[k].filename().string();
      try {
        const Channels in{find_channel(items[k], "vessel"), find_channel(items[k], "artery"),
                          find_channel(items[k], "vein")};
        entries[k] = refine_one(in, cfg, digest, c.out / name);
      } catch (...) {
        failures[k] = classify(std::current_exception());
        entries[k] = {{"status", "error"}, {"error_class", failures[k].error_class}, {"message", failures[k].message}};
      }
      entries[k]["name"] = name;
    }
    for (json& e : entries) m["images"].push_back(std::move(e));
    record_batch_failure(m, failures);
    if (!c.quiet && !c.json) std::cout << "processed " << items.size() << " images into " << c.out.string() << "\n";
  });
}

struct EvalInputs {
  fs::path pred, gt, gt_vessel, scores;
};

EvalReport eval_one(const EvalInputs& in) {
  const LabelMap pred = load_label_map(in.pred);
  const LabelMap gt = load_label_map(in.gt);
  const BinaryMap gt_vessel = read_binary_png(in.gt_vessel);
  if (in.scores.empty()) return evaluate(pred, gt, gt_vessel);
  const RealGrid scores = load_probability_map(in.scores);
  return evaluate(pred, gt, gt_vessel, &scores);
}

int cmd_eval(const Common& c, const EvalInputs& single, const fs::path& batch) {
  return run_command("eval", c, [&](json& m) {
    std::vector<std::pair<std::string, EvalReport>> rows;
    std::vector<Failure> failures;
    if (batch.empty()) {
      if (single.pred.empty() || single.gt.empty() || single.gt_vessel.empty())
        throw InputError("expected PRED GT GT_VESSEL or --batch DIR");
      const auto t0 = std::chrono::steady_clock::now();
      rows.emplace_back(single.pred.filename().string(), eval_one(single));
      m["images"].push_back({{"name", rows.back().first},
                             {"inputs", {single.pred.string(), single.gt.string(), single.gt_vessel.string()}},
                             {"report", to_json(rows.back().second)},
                             {"elapsed_ms", elapsed_ms(t0)}});
    } else {
      for (const fs::path& item : batch_items(batch)) {
        const std::string name = item.filename().string();
        const auto t0 = std::chrono::steady_clock::now();
        try {
          EvalInputs in{item / "pred.png", item / "gt.png", item / "gt_vessel.png", {}};
          for (const char* ext : {".pfm", ".png"})
            if (fs::exists(item / (std::string("vessel") + ext))) {
              in.scores = item / (std::string("vessel") + ext);
              break;
            }
          rows.emplace_back(name, eval_one(in));
          m["images"].push_back({{"name", name}, {"report", to_json(rows.back().second)}, {"elapsed_ms", elapsed_ms(t0)}});
        } catch (...) {
          failures.push_back(classify(std::current_exception()));
          m["images"].push_back({{"name", name},
                                 {"status", "error"},
                                 {"error_class", failures.back().error_class},
                                 {"message", failures.back().message}});
        }
      }
      std::vector<EvalReport> reports;
      for (const auto& [name, r] : rows) reports.push_back(r);
      if (!reports.empty()) rows.emplace_back("mean", mean_report(reports));
      m["mean"] = reports.empty() ? json() : to_json(rows.back().second);
    }
    const std::string table = format_table(rows);
    write_text(c.out / "report.txt", table);
    m["outputs"] = {"report.txt"};
    if (!c.quiet && !c.json) std::cout << table;
    record_batch_failure(m, failures);
  });
}

int cmd_synth(const Common& c, const fs::path& spec_path, const std::vector<std::string>& overrides) {
  return run_command("synth", c, [&](json& m) {
    nlohmann::json spec_json = nlohmann::json::object();
    if (!spec_path.empty()) {
      std::ifstream f(spec_path);
      if (!f) throw ConfigError("cannot read spec " + spec_path.string());
      try {
        spec_json = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid spec " + spec_path.string() + ": " + e.what());
      }
      m["spec"] = spec_path.string();
    }
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key=value, got " + kv);
      try {
        spec_json[kv.substr(0, eq)] = nlohmann::json::parse(kv.substr(eq + 1));
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value in " + kv);
      }
    }
    const SynthSpec spec = synth_spec_from_json(spec_json);
    const auto t0 = std::chrono::steady_clock::now();
    const SynthSample s = generate(spec);

    write_pfm(s.maps.vessel, c.out / "vessel.pfm");
    write_pfm(s.maps.artery, c.out / "artery.pfm");
    write_pfm(s.maps.vein, c.out / "vein.pfm");
    save_label_map(s.truth, c.out / "gt.png");
    write_binary_png(s.vessel_truth, c.out / "gt_vessel.png");
    save_overlay(s.truth, c.out / "gt_overlay.png");
    save_label_map(argmax_labels(s.maps, binarize(s.maps.vessel, 0.5)), c.out / "argmax.png");
    write_text(c.out / "spec.json", to_json(spec).dump(2) + "\n");
    RefineConfig cfg;
    cfg.cup = spec.cup();
    save_config(cfg, c.out / "config.json");

    m["synth_spec"] = to_json(spec);
    m["images"].push_back({{"name", "."},
                           {"outputs", {"vessel.pfm", "artery.pfm", "vein.pfm", "gt.png", "gt_vessel.png",
                                        "gt_overlay.png", "argmax.png", "spec.json", "config.json"}},
                           {"elapsed_ms", elapsed_ms(t0)}});
    if (!c.quiet && !c.json) std::cout << m.dump(2) << "\n";
  });
}

int cmd_skeleton(const Common& c, const fs::path& vessel, double threshold) {
  return run_command("skeleton", c, [&](json& m) {
    const auto t0 = std::chrono::steady_clock::now();
    const RealGrid v = load_probability_map(vessel);
    std::vector<std::string> outputs;
    json counts = json::array();
    if (c.config.empty()) {
      if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("--threshold must lie in (0, 1)");
      const SkeletonMap s = thin(binarize(v, threshold));
      write_binary_png(s.bits, c.out / "skeleton.png");
      outputs.push_back("skeleton.png");
      counts.push_back(count_foreground(s.bits));
    } else {
      const RefineConfig cfg = load_config(c.config);
      m["config_digest"] = config_digest(cfg);
      for (std::size_t k = 0; k < cfg.thresholds.size(); ++k) {
        const SkeletonMap s = thin(binarize(v, cfg.thresholds[k]));
        const std::string name = "skeleton_" + std::to_string(k) + ".png";
        write_binary_png(s.bits, c.out / name);
        outputs.push_back(name);
        counts.push_back(count_foreground(s.bits));
      }
    }
    m["images"].push_back({{"name", "."},
                           {"inputs", {vessel.string()}},
                           {"outputs", outputs},
                           {"skeleton_pixels", counts},
                           {"elapsed_ms", elapsed_ms(t0)}});
    if (!c.quiet && !c.json)
      for (std::size_t k = 0; k < outputs.size(); ++k)
        std::cout << outputs[k] << ": " << counts[k] << " skeleton pixels\n";
  });
}

int cmd_graph(const Common& c, const fs::path& vessel) {
  return run_command("graph", c, [&](json& m) {
    const RefineConfig cfg = require_config(c);
    const std::string digest = config_digest(cfg);
    m["config_digest"] = digest;
    const auto t0 = std::chrono::steady_clock::now();
    const RealGrid v = load_probability_map(vessel);
    const std::vector<SkeletonMap> skeletons = fuse_multiscale(v, cfg.thresholds);
    const VesselGraph g = build_graph(skeletons, binarize(v, cfg.thresholds.back()), cfg.cup);
    write_text(c.out / "graph.json", graph_to_json(g, digest).dump(1) + "\n");
    write_rgb_png(render_graph(g, cfg.cup), c.out / "keypoints.png");
    m["images"].push_back({{"name", "."},
                           {"inputs", {vessel.string()}},
                           {"outputs", {"graph.json", "keypoints.png"}},
                           {"segments", g.segments.size()},
                           {"keypoints", g.keypoints.size()},
                           {"elapsed_ms", elapsed_ms(t0)}});
    if (!c.quiet && !c.json)
      std::cout << g.segments.size() << " segments, " << g.keypoints.size() << " keypoints\n";
  });
}

int cmd_render(const Common& c, const fs::path& labels) {
  return run_command("render", c, [&](json& m) {
    const auto t0 = std::chrono::steady_clock::now();
    save_overlay(load_label_map(labels), c.out / "overlay.png");
    m["images"].push_back({{"name", "."},
                           {"inputs", {labels.string()}},
                           {"outputs", {"overlay.png"}},
                           {"elapsed_ms", elapsed_ms(t0)}});
    if (!c.quiet && !c.json) std::cout << "wrote " << (c.out / "overlay.png").string() << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artery/vein label refinement for retinal vessel probability maps"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;

  std::vector<fs::path> refine_maps_in;
  fs::path refine_batch;
  auto* refine = app.add_subcommand("refine", "Refine artery/vein labels of one map set or a batch directory");
  refine->add_option("maps", refine_maps_in, "VESSEL ARTERY VEIN probability maps (PNG or PFM)")->expected(0, 3);
  refine->add_option("--batch", refine_batch, "Directory of image folders holding vessel/artery/vein maps");
  add_common(refine, common, true);

  EvalInputs eval_in;
  fs::path eval_batch;
  auto* eval = app.add_subcommand("eval", "Score predicted labels against ground truth");
  eval->add_option("pred", eval_in.pred, "Predicted label map");
  eval->add_option("gt", eval_in.gt, "Ground-truth label map");
  eval->add_option("gt_vessel", eval_in.gt_vessel, "Ground-truth vessel mask");
  eval->add_option("--scores", eval_in.scores, "Vessel probability map, enables the segmentation AUC");
  eval->add_option("--batch", eval_batch, "Directory of image folders holding pred/gt/gt_vessel PNGs");
  add_common(eval, common, false);

  fs::path spec_path;
  std::vector<std::string> overrides;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic fixture with ground truth");
  synth->add_option("spec", spec_path, "Synthetic spec (JSON); defaults apply to missing keys");
  synth->add_option("--set", overrides, "Override a spec key, e.g. --set seed=7");
  add_common(synth, common, false);

  fs::path skeleton_in;
  double threshold = 0.5;
  auto* skeleton = app.add_subcommand("skeleton", "Binarize and thin a vessel map");
  skeleton->add_option("vessel", skeleton_in, "Vessel probability map")->required();
  skeleton->add_option("--threshold", threshold, "Binarization threshold without --config")->capture_default_str();
  add_common(skeleton, common, true);

  fs::path graph_in;
  auto* graph = app.add_subcommand("graph", "Extract the vessel graph and render its keypoints");
  graph->add_option("vessel", graph_in, "Vessel probability map")->required();
  add_common(graph, common, true);

  fs::path render_in;
  auto* render = app.add_subcommand("render", "Render a label map as a red/blue overlay");
  render->add_option("labels", render_in, "Label map PNG")->required();
  add_common(render, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (refine->parsed()) return cmd_refine(common, refine_maps_in, refine_batch);
  if (eval->parsed()) return cmd_eval(common, eval_in, eval_batch);
  if (synth->parsed()) return cmd_synth(common, spec_path, overrides);
  if (skeleton->parsed()) return cmd_skeleton(common, skeleton_in, threshold);
  if (graph->parsed()) return cmd_graph(common, graph_in);
  return cmd_render(common, render_in);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "avrefine/config.hpp"
#include "avrefine/errors.hpp"
#include "avrefine/pipeline.hpp"
#include "avrefine/synth.hpp"
#include "temp_dir.hpp"

using namespace avr;

namespace {

nlohmann::json minimal() { return nlohmann::json::parse(R"({"cup": {"center": [10, 12], "radius": 4}})"); }

}  // namespace

TEST_CASE("defaults") {
  const RefineConfig cfg = config_from_json(minimal());
  CHECK(cfg.thresholds == std::vector<double>{0.5, 0.3, 0.1});
  CHECK(cfg.iterations == 5);
  CHECK(cfg.max_angle_deg == 180.0);
  CHECK(cfg.max_line_angle_deg == 90.0);
  CHECK(cfg.max_thickness_px == 5.0);
  CHECK(cfg.max_distance_px == 20.0);
  CHECK(cfg.cup == CupRegion{10.0, 12.0, 4.0});
}

TEST_CASE("invalid configs") {
  auto j = minimal();
  j["thresholds"] = {0.3, 0.5};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal();
  j["iterations"] = -1;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal();
  j["m_D"] = 0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal();
  j["extra"] = 1;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal();
  j.erase("cup");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal();
  j["cup"]["radius"] = -2;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal();
  j["m_A"] = "wide";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("file round trip and digest") {
  TempDir dir("config");
  RefineConfig cfg;
  cfg.iterations = 3;
  cfg.cup = {1.5, 2.5, 3.0};
  save_config(cfg, dir / "c.json");
  const RefineConfig back = load_config(dir / "c.json");
  CHECK(back == cfg);
  CHECK(config_digest(back) == config_digest(cfg));
  CHECK(config_digest(back).size() == 16);
  cfg.iterations = 4;
  CHECK(config_digest(back) != config_digest(cfg));

  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("graph export keeps its field order") {
  SynthSpec spec;
  spec.width = spec.height = 96;
  spec.max_width = 5.0;
  spec.cup_radius = 8.0;
  const SynthSample s = generate(spec);
  RefineConfig cfg;
  cfg.cup = spec.cup();
  const RefineOutput out = refine_maps(s.maps, cfg);
  const auto j = graph_to_json(out.propagated, config_digest(cfg));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"width", "height", "config_digest", "keypoints", "segments"});
  REQUIRE(j["segments"].size() == out.propagated.segments.size());
  const auto& seg = j["segments"][0];
  CHECK(seg["id"] == 0);
  CHECK(seg["pixels"].size() == out.propagated.segments[0].pixels.size());
  CHECK(seg.contains("tangents"));
  CHECK(j.dump() == graph_to_json(out.propagated, config_digest(cfg)).dump());
}

#include "avrefine/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>

#include "avrefine/errors.hpp"

namespace avr {

void RefineConfig::validate() const {
  if (thresholds.empty()) throw ConfigError("thresholds must not be empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) throw ConfigError("thresholds must lie in (0,1)");
    if (i > 0 && !(thresholds[i] < thresholds[i - 1])) {
      throw ConfigError("thresholds must be strictly descending");
    }
  }
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  for (double m : {max_angle_deg, max_line_angle_deg, max_thickness_px, max_distance_px}) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("normalization maxima must be positive");
  }
  if (!(cup.radius >= 0.0) || !std::isfinite(cup.center_x) || !std::isfinite(cup.center_y)) {
    throw ConfigError("cup radius must be >= 0 with a finite center");
  }
}

nlohmann::ordered_json to_json(const RefineConfig& cfg) {
  nlohmann::ordered_json j;
  j["thresholds"] = cfg.thresholds;
  j["iterations"] = cfg.iterations;
  j["m_A"] = cfg.max_angle_deg;
  j["m_L"] = cfg.max_line_angle_deg;
  j["m_T"] = cfg.max_thickness_px;
  j["m_D"] = cfg.max_distance_px;
  j["cup"] = {{"center", {cfg.cup.center_x, cfg.cup.center_y}}, {"radius", cfg.cup.radius}};
  return j;
}

RefineConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"thresholds", "iterations", "m_A", "m_L", "m_T", "m_D", "cup"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key: " + key);
  }
  RefineConfig cfg;
  try {
    if (j.contains("thresholds")) cfg.thresholds = j.at("thresholds").get<std::vector<double>>();
    if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<int>();
    if (j.contains("m_A")) cfg.max_angle_deg = j.at("m_A").get<double>();
    if (j.contains("m_L")) cfg.max_line_angle_deg = j.at("m_L").get<double>();
    if (j.contains("m_T")) cfg.max_thickness_px = j.at("m_T").get<double>();
    if (j.contains("m_D")) cfg.max_distance_px = j.at("m_D").get<double>();
    if (!j.contains("cup")) throw ConfigError("config is missing the required \"cup\" region");
    const auto& cup = j.at("cup");
    const auto center = cup.at("center").get<std::vector<double>>();
    if (center.size() != 2) throw ConfigError("cup.center must be [x, y]");
    cfg.cup = {center[0], center[1], cup.at("radius").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RefineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const RefineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string config_digest(const RefineConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

}  // namespace avr

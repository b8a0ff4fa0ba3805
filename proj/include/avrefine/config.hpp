#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "avrefine/vessel_graph.hpp"

namespace avr {

/// Parameters of the post-processing. The four maxima normalize the angle,
/// collinearity, thickness and distance terms of the propagation coefficient.
struct RefineConfig {
  std::vector<double> thresholds{0.5, 0.3, 0.1};
  int iterations = 5;
  double max_angle_deg = 180.0;      // m_A
  double max_line_angle_deg = 90.0;  // m_L
  double max_thickness_px = 5.0;     // m_T
  double max_distance_px = 20.0;     // m_D
  CupRegion cup;

  /// Throws ConfigError on non-positive maxima, negative iterations, or a
  /// threshold list that is empty, outside (0,1) or not strictly descending.
  void validate() const;

  friend bool operator==(const RefineConfig&, const RefineConfig&) = default;
};

nlohmann::ordered_json to_json(const RefineConfig& cfg);

/// Strict parse: unknown keys and a missing "cup" are errors (ConfigError).
RefineConfig config_from_json(const nlohmann::json& j);
RefineConfig load_config(const std::filesystem::path& path);
void save_config(const RefineConfig& cfg, const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical JSON form of the config.
std::string config_digest(const RefineConfig& cfg);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace avr

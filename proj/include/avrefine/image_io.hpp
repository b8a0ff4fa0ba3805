#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "avrefine/grid.hpp"
#include "avrefine/raster.hpp"

namespace avr {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// A probability channel as read from disk. `max_value` is the integer format
/// maximum (255 or 65535), or 0 for floating-point PFM input.
struct LoadedMap {
  RealGrid values;
  std::uint32_t max_value = 0;
};

/// Reads an 8/16-bit grayscale PNG (scaled by the format maximum) or a PFM
/// (verbatim, clamped to [0,1]). Both sides must be at least 16 pixels.
LoadedMap read_probability_map(const std::filesystem::path& path);
RealGrid load_probability_map(const std::filesystem::path& path);

/// Loads the three classifier channels and checks they agree in shape.
ProbabilityMaps load_probability_maps(const std::filesystem::path& vessel,
                                      const std::filesystem::path& artery,
                                      const std::filesystem::path& vein);

RealGrid read_pfm(const std::filesystem::path& path);
void write_pfm(const RealGrid& grid, const std::filesystem::path& path);

/// Quantizes [0,1] values to an 8- or 16-bit grayscale PNG (round to nearest).
void write_probability_png(const RealGrid& grid, const std::filesystem::path& path, int bit_depth);

void write_gray_png(const Grid<std::uint8_t>& gray, const std::filesystem::path& path);
void write_gray16_png(const Grid<std::uint16_t>& gray, const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_rgb_png(const std::filesystem::path& path);

/// Binary map as 0/255 grayscale and back (any nonzero gray or color is foreground).
void write_binary_png(const BinaryMap& map, const std::filesystem::path& path);
BinaryMap read_binary_png(const std::filesystem::path& path);

/// Artery red, vein blue, background black.
RgbImage render_overlay(const LabelMap& labels);
void save_overlay(const LabelMap& labels, const std::filesystem::path& path);

/// Label maps on disk are either 8-bit grayscale holding 0/1/2 or RGB in the
/// overlay colors. For RGB, red-dominant pixels are artery, blue-dominant are
/// vein, anything else (black, green crossings, white uncertain) is background.
void save_label_map(const LabelMap& labels, const std::filesystem::path& path);
LabelMap load_label_map(const std::filesystem::path& path);

}  // namespace avr

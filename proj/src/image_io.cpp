#include "avrefine/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "avrefine/errors.hpp"

namespace avr {
namespace {

constexpr int kMinMapSide = 16;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    if (mode[0] == 'r') throw InputError("cannot open " + path.string());
    throw std::runtime_error("cannot write " + path.string());
  }
  return f;
}

// libpng reports errors by longjmp. Everything touched after setjmp lives in
// this struct or in caller-owned storage, so the unwinding is benign.
struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(state->jump, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 or 3 after alpha stripping / palette expansion
  int bit_depth = 0;  // 8 or 16
  int source_color_type = 0;
  std::vector<std::uint8_t> bytes;  // raw rows, 16-bit samples big-endian
};

bool decode_png(std::FILE* file, DecodedPng* out, PngErrorState* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, png_error_handler,
                                           png_warning_handler);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(err->jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  out->source_color_type = color_type;
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out->width = static_cast<int>(png_get_image_width(png, info));
  out->height = static_cast<int>(png_get_image_height(png, info));
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out->bytes.resize(row_bytes * static_cast<std::size_t>(out->height));
  for (int y = 0; y < out->height; ++y) {
    png_read_row(png, out->bytes.data() + row_bytes * static_cast<std::size_t>(y), nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

DecodedPng read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw InputError("not a PNG file: " + path.string());
  }
  std::rewind(file.get());
  DecodedPng decoded;
  PngErrorState err;
  if (!decode_png(file.get(), &decoded, &err)) {
    throw InputError("corrupt PNG " + path.string() + ": " + err.message);
  }
  return decoded;
}

bool encode_png(std::FILE* file, int width, int height, int color_type, int bit_depth,
                const std::uint8_t* rows, std::size_t row_bytes, PngErrorState* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_handler,
                                            png_warning_handler);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(err->jump)) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, rows + row_bytes * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               int bit_depth, const std::vector<std::uint8_t>& bytes) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("cannot write an empty PNG");
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t row_bytes =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) * (bit_depth / 8);
  FilePtr file = open_file(path, "wb");
  PngErrorState err;
  if (!encode_png(file.get(), width, height, color_type, bit_depth, bytes.data(), row_bytes, &err)) {
    throw std::runtime_error("failed to write PNG " + path.string() + ": " + err.message);
  }
}

std::uint16_t sample16(const std::vector<std::uint8_t>& bytes, std::size_t k) {
  return static_cast<std::uint16_t>((bytes[2 * k] << 8) | bytes[2 * k + 1]);
}

std::uint32_t to_host(std::uint32_t word, bool little_endian) {
  const bool host_little = std::endian::native == std::endian::little;
  if (host_little == little_endian) return word;
  return ((word & 0xFFu) << 24) | ((word & 0xFF00u) << 8) | ((word >> 8) & 0xFF00u) | (word >> 24);
}

bool has_extension(const std::filesystem::path& path, const char* ext) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

}  // namespace

RealGrid read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());

  std::string magic;
  in >> magic;
  if (magic == "PF") throw InputError("color PFM is not supported: " + path.string());
  if (magic != "Pf") throw InputError("not a grayscale PFM file: " + path.string());
  long long width = 0;
  long long height = 0;
  double scale = 0.0;
  if (!(in >> width >> height >> scale) || width <= 0 || height <= 0 || scale == 0.0 ||
      width > (1 << 20) || height > (1 << 20)) {
    throw InputError("corrupt PFM header: " + path.string());
  }
  in.get();  // single whitespace byte before the raster
  const bool little_endian = scale < 0.0;

  RealGrid grid(static_cast<int>(width), static_cast<int>(height));
  std::vector<std::uint32_t> row(static_cast<std::size_t>(width));
  // rows are stored bottom-to-top
  for (long long r = 0; r < height; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t)));
    if (!in) throw InputError("truncated PFM raster: " + path.string());
    const int y = static_cast<int>(height - 1 - r);
    for (long long x = 0; x < width; ++x) {
      const float value = std::bit_cast<float>(to_host(row[static_cast<std::size_t>(x)], little_endian));
      if (std::isnan(value)) throw InputError("NaN in PFM raster: " + path.string());
      grid(static_cast<int>(x), y) = value;
    }
  }
  return grid;
}

void write_pfm(const RealGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "Pf\n" << grid.width() << ' ' << grid.height() << "\n-1.0\n";
  std::vector<std::uint32_t> row(static_cast<std::size_t>(grid.width()));
  for (int y = grid.height() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width(); ++x) {
      row[static_cast<std::size_t>(x)] = to_host(std::bit_cast<std::uint32_t>(grid(x, y)), true);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t)));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

LoadedMap read_probability_map(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("missing input file: " + path.string());
  LoadedMap loaded;
  if (has_extension(path, ".pfm")) {
    loaded.values = read_pfm(path);
    for (float& v : loaded.values.values()) v = std::clamp(v, 0.0f, 1.0f);
    loaded.max_value = 0;
  } else {
    const DecodedPng png = read_png(path);
    if (png.source_color_type != PNG_COLOR_TYPE_GRAY || png.channels != 1) {
      throw InputError("unsupported format (expected grayscale PNG): " + path.string());
    }
    loaded.values = RealGrid(png.width, png.height);
    auto values = loaded.values.values();
    if (png.bit_depth == 16) {
      loaded.max_value = 65535;
      for (std::size_t k = 0; k < values.size(); ++k) {
        values[k] = static_cast<float>(static_cast<double>(sample16(png.bytes, k)) / 65535.0);
      }
    } else {
      loaded.max_value = 255;
      for (std::size_t k = 0; k < values.size(); ++k) {
        values[k] = static_cast<float>(static_cast<double>(png.bytes[k]) / 255.0);
      }
    }
  }
  if (loaded.values.width() < kMinMapSide || loaded.values.height() < kMinMapSide) {
    std::ostringstream msg;
    msg << "map " << path.string() << " is " << loaded.values.width() << "x"
        << loaded.values.height() << ", below the 16x16 minimum";
    throw InputError(msg.str());
  }
  return loaded;
}

RealGrid load_probability_map(const std::filesystem::path& path) {
  return read_probability_map(path).values;
}

ProbabilityMaps load_probability_maps(const std::filesystem::path& vessel,
                                      const std::filesystem::path& artery,
                                      const std::filesystem::path& vein) {
  for (const auto* p : {&vessel, &artery, &vein}) {
    if (!std::filesystem::exists(*p)) throw InputError("missing input file: " + p->string());
  }
  LoadedMap v = read_probability_map(vessel);
  LoadedMap a = read_probability_map(artery);
  if (!a.values.same_shape(v.values)) {
    throw InputError("dimension mismatch: " + artery.string() + " vs " + vessel.string());
  }
  LoadedMap b = read_probability_map(vein);
  if (!b.values.same_shape(v.values)) {
    throw InputError("dimension mismatch: " + vein.string() + " vs " + vessel.string());
  }
  // Independent rounding of two quantized channels can overshoot 1 by one step each.
  double tolerance = 1e-6;
  for (const LoadedMap* m : {&a, &b}) {
    if (m->max_value != 0) tolerance += 1.0 / static_cast<double>(m->max_value);
  }
  ProbabilityMaps maps{std::move(v.values), std::move(a.values), std::move(b.values)};
  maps.validate(tolerance);
  return maps;
}

void write_probability_png(const RealGrid& grid, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("bit depth must be 8 or 16");
  const double max_value = bit_depth == 8 ? 255.0 : 65535.0;
  const auto values = grid.values();
  std::vector<std::uint8_t> bytes(values.size() * static_cast<std::size_t>(bit_depth / 8));
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double clamped = std::clamp(static_cast<double>(values[k]), 0.0, 1.0);
    const auto q = static_cast<std::uint32_t>(std::lround(clamped * max_value));
    if (bit_depth == 8) {
      bytes[k] = static_cast<std::uint8_t>(q);
    } else {
      bytes[2 * k] = static_cast<std::uint8_t>(q >> 8);
      bytes[2 * k + 1] = static_cast<std::uint8_t>(q & 0xFF);
    }
  }
  write_png(path, grid.width(), grid.height(), PNG_COLOR_TYPE_GRAY, bit_depth, bytes);
}

void write_gray_png(const Grid<std::uint8_t>& gray, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(gray.values().begin(), gray.values().end());
  write_png(path, gray.width(), gray.height(), PNG_COLOR_TYPE_GRAY, 8, bytes);
}

void write_gray16_png(const Grid<std::uint16_t>& gray, const std::filesystem::path& path) {
  const auto values = gray.values();
  std::vector<std::uint8_t> bytes(values.size() * 2);
  for (std::size_t k = 0; k < values.size(); ++k) {
    bytes[2 * k] = static_cast<std::uint8_t>(values[k] >> 8);
    bytes[2 * k + 1] = static_cast<std::uint8_t>(values[k] & 0xFF);
  }
  write_png(path, gray.width(), gray.height(), PNG_COLOR_TYPE_GRAY, 16, bytes);
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  write_png(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 8, image.rgb);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  const DecodedPng png = read_png(path);
  RgbImage image{png.width, png.height, {}};
  const std::size_t n = static_cast<std::size_t>(png.width) * static_cast<std::size_t>(png.height);
  image.rgb.resize(n * 3);
  for (std::size_t k = 0; k < n; ++k) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t src = k * static_cast<std::size_t>(png.channels) +
                              static_cast<std::size_t>(png.channels == 3 ? c : 0);
      image.rgb[k * 3 + static_cast<std::size_t>(c)] =
          png.bit_depth == 16 ? static_cast<std::uint8_t>(sample16(png.bytes, src) >> 8)
                              : png.bytes[src];
    }
  }
  return image;
}

void write_binary_png(const BinaryMap& map, const std::filesystem::path& path) {
  Grid<std::uint8_t> gray(map.width(), map.height());
  auto dst = gray.values();
  auto src = map.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] ? 255 : 0;
  write_gray_png(gray, path);
}

BinaryMap read_binary_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("missing input file: " + path.string());
  const RgbImage image = read_rgb_png(path);
  BinaryMap map(image.width, image.height);
  auto dst = map.values();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    dst[k] = (image.rgb[3 * k] | image.rgb[3 * k + 1] | image.rgb[3 * k + 2]) != 0;
  }
  return map;
}

RgbImage render_overlay(const LabelMap& labels) {
  RgbImage image{labels.width(), labels.height(), {}};
  image.rgb.assign(labels.size() * 3, 0);
  const auto src = labels.values();
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (src[k] == Label::artery) image.rgb[3 * k] = 255;
    if (src[k] == Label::vein) image.rgb[3 * k + 2] = 255;
  }
  return image;
}

void save_overlay(const LabelMap& labels, const std::filesystem::path& path) {
  write_rgb_png(render_overlay(labels), path);
}

void save_label_map(const LabelMap& labels, const std::filesystem::path& path) {
  Grid<std::uint8_t> gray(labels.width(), labels.height());
  auto dst = gray.values();
  auto src = labels.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<std::uint8_t>(src[k]);
  write_gray_png(gray, path);
}

LabelMap load_label_map(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("missing input file: " + path.string());
  const DecodedPng png = read_png(path);
  LabelMap labels(png.width, png.height);
  auto dst = labels.values();
  if (png.channels == 1) {
    if (png.bit_depth != 8) throw InputError("grayscale label maps must be 8-bit: " + path.string());
    for (std::size_t k = 0; k < dst.size(); ++k) {
      const std::uint8_t value = png.bytes[k];
      if (value > 2) throw InputError("label value outside {0,1,2} in " + path.string());
      dst[k] = static_cast<Label>(value);
    }
    return labels;
  }
  const RgbImage rgb = read_rgb_png(path);
  for (std::size_t k = 0; k < dst.size(); ++k) {
    const int r = rgb.rgb[3 * k];
    const int g = rgb.rgb[3 * k + 1];
    const int b = rgb.rgb[3 * k + 2];
    if (r >= 128 && g < 128 && b < 128) {
      dst[k] = Label::artery;
    } else if (b >= 128 && r < 128 && g < 128) {
      dst[k] = Label::vein;
    } else {
      dst[k] = Label::background;
    }
  }
  return labels;
}

}  // namespace avr

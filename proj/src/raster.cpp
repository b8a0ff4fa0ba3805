#include "avrefine/raster.hpp"

#include <algorithm>
#include <sstream>

#include "avrefine/errors.hpp"
#include "avrefine/kernels.hpp"

namespace avr {

void ProbabilityMaps::validate(double sum_tolerance) const {
  if (!vessel.same_shape(artery) || !vessel.same_shape(vein)) {
    throw InputError("probability maps differ in dimensions");
  }
  const auto check_range = [](const RealGrid& g, const char* name) {
    for (float value : g.values()) {
      if (!(value >= 0.0f && value <= 1.0f)) {
        throw InputError(std::string(name) + " map has a value outside [0,1]");
      }
    }
  };
  check_range(vessel, "vessel");
  check_range(artery, "artery");
  check_range(vein, "vein");

  const auto a = artery.values();
  const auto v = vein.values();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (static_cast<double>(a[k]) + static_cast<double>(v[k]) > 1.0 + sum_tolerance) {
      std::ostringstream msg;
      msg << "artery + vein exceeds 1 at pixel (" << k % static_cast<std::size_t>(width()) << ", "
          << k / static_cast<std::size_t>(width()) << ")";
      throw InputError(msg.str());
    }
  }
}

BinaryMap binarize(const RealGrid& v, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("binarize: theta must lie in (0,1)");
  BinaryMap out(v.width(), v.height());
  kernels::omp::binarize(v.values(), theta, out.values());
  return out;
}

std::size_t count_foreground(const BinaryMap& map) {
  return static_cast<std::size_t>(std::count_if(map.values().begin(), map.values().end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

BinaryMap vessel_mask(const LabelMap& labels) {
  BinaryMap out(labels.width(), labels.height());
  auto dst = out.values();
  auto src = labels.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] != Label::background;
  return out;
}

}  // namespace avr

#pragma once

namespace avr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace avr

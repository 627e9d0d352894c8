#pragma once

namespace berrydyn {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace berrydyn

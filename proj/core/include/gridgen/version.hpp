#pragma once

namespace gridgen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gridgen

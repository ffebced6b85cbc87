#pragma once

namespace gradfeat {

inline constexpr const char* kProjectName = "gradfeat";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace gradfeat

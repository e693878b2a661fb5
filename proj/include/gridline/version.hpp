#pragma once

namespace gridline {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gridline

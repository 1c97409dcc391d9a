#pragma once

namespace rtevans {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rtevans

#pragma once

namespace reslab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace reslab

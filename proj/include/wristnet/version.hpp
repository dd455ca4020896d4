#pragma once

namespace wristnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wristnet

#pragma once

namespace rdp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rdp

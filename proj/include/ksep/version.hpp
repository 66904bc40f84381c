#pragma once

namespace ksep {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ksep

#pragma once

namespace hklapse {

inline constexpr const char* kToolName = "hklapse";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace hklapse

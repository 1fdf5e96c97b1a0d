#pragma once

namespace ron {

inline constexpr const char* kVersion = "0.1.0";

// Recorded in output metadata so traces can be tied to the generator.
inline constexpr const char* kRngDescription =
    "splitmix64; child streams derived as mix(state ^ mix(tag ^ 0x9e3779b97f4a7c15))";

}  // namespace ron

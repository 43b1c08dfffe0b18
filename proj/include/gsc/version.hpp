#pragma once

namespace gsc {

inline constexpr const char* kToolName = "gsc";
inline constexpr const char* kToolVersion = "0.1.0";

// Identifies the deterministic generator pair used for all sampling.
inline constexpr const char* kRngId = "splitmix64/xoshiro256ss";

}  // namespace gsc

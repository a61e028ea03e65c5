#pragma once

namespace cutofflab {

inline constexpr const char* version_string = "0.1.0";

// Default RNG seed for every reproducibility-sensitive entry point.
inline constexpr unsigned long long default_seed = 0xC0FFEEULL;

}  // namespace cutofflab

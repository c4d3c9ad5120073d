#pragma once

#include <cstdint>
#include <random>

namespace vehoff {

// std::mt19937_64 has a fully specified output sequence, so trajectories are
// reproducible across standard libraries as long as we avoid the
// implementation-defined distribution classes.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of the random stream for trial `index` under `master`. Every policy
/// evaluated on the same trial index draws the same trajectories.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ull + 1));
}

}  // namespace vehoff

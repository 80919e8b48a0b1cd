#pragma once

#include <cstdint>
#include <random>

namespace mprompt {

// All seeded procedures draw from this engine. The standard distributions are
// implementation-defined, so the two helpers below pin the exact mapping from
// engine output to values to keep results identical across toolchains.
using Rng = std::mt19937_64;

// Uniform integer in [0, bound) by rejection on the top bits. bound > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw > limit);
  return draw % bound;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mprompt

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace foodpair {

using Rng = std::mt19937_64;

// Unbiased integer in [0, bound) by rejection; identical on every standard
// library, unlike std::uniform_int_distribution.
inline std::uint64_t bounded(Rng& rng, std::uint64_t bound) {
  // 2^64 mod bound values at the bottom of the range would bias the modulo.
  const std::uint64_t reject_below = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t draw = rng();
    if (draw >= reject_below) return draw % bound;
  }
}

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = bounded(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace foodpair

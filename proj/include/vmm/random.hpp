#pragma once

#include <cstdint>
#include <random>

namespace vmm {

// The standard distributions are implementation-defined; these helpers keep
// generated traces and random placement identical across standard libraries.

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Uniform in [0, 1).
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace vmm

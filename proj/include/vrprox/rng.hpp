#ifndef VRPROX_RNG_HPP
#define VRPROX_RNG_HPP

#include <cstdint>
#include <random>

namespace vrprox {

/// Engine used by every solver run. One engine per run, never shared.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Turns structured seeds (base + i) into
/// decorrelated engine seeds.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits. Bit-reproducible across
/// standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace vrprox

#endif  // VRPROX_RNG_HPP

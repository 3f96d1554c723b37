#pragma once

#include <cstdint>

namespace bsdelab {

// Standard normal quantile: Acklam's rational approximation polished with one
// Halley step of the exact erfc residual. Accurate to ~1 ulp over (0, 1).
double normal_inv_cdf(double p);

// splitmix64: tiny, stateless-seedable, passes BigCrush as a 64-bit mixer.
// Used as an independent stream per path so any path can be regenerated from
// (seed, index) alone, independent of chunking or thread schedule.
struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1), strictly inside: (x >> 11 + 0.5) * 2^-53.
  double next_uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() { return normal_inv_cdf(next_uniform()); }
};

// Decorrelated stream for one path of one ensemble.
SplitMix64 path_stream(std::uint64_t seed, std::uint64_t path_index);

}  // namespace bsdelab

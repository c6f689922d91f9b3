#pragma once

// Counter-based draws: every Bernoulli outcome is a pure function of
// (trial seed, link index), so trials and links can be evaluated in any order
// or on any worker without changing results.

#include <cmath>
#include <cstdint>

namespace sbc::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` under `master`; distinct indices give unrelated streams.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master + kGolden) ^ mix64((index + 1) * kGolden));
}

/// The `counter`-th 64-bit word of the stream seeded by `seed`.
inline constexpr std::uint64_t draw(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed + (counter + 1) * kGolden);
}

/// Integer threshold t with P[u < t] = p for uniform 64-bit u; p >= 1 maps to
/// "always" and is handled by `bernoulli`.
inline std::uint64_t threshold(double p) {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return UINT64_MAX;
  return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

inline bool bernoulli(std::uint64_t seed, std::uint64_t counter, double p) {
  if (p >= 1.0) return true;
  return draw(seed, counter) < threshold(p);
}

}  // namespace sbc::rng

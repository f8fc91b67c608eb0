#pragma once

#include <cstdint>

namespace nlshom::rng {

/**
 * Counter-based generator in the SplitMix64 family.
 *
 * Every draw is a pure function of (seed, key words): there is no stream
 * state, so lattice sites and Monte-Carlo trials can be evaluated in any
 * order, in parallel, with bit-identical results. Construction: the seed
 * is pre-whitened with one finalizer pass, each key word is absorbed by a
 * golden-ratio weighted SplitMix64 step, and the last pass is the output.
 */

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer: bijective, full avalanche on 64 bits.
inline std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Fold one key word into a running hash.
inline std::uint64_t absorb(std::uint64_t h, std::uint64_t w) {
  return mix(h + kGamma * (w + 0x632BE59BD9B4E019ull));
}

/// Keyed draw on up to three words.
inline std::uint64_t draw(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix(seed + kGamma);
  h = absorb(h, a);
  h = absorb(h, b);
  return absorb(h, c);
}

/// Map a signed lattice index to a key word (two's complement, bijective).
inline std::uint64_t word(long long k) { return static_cast<std::uint64_t>(k); }

/// Uniform double in [0, 1), 53 significant bits.
inline double uniform01(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

/// Symmetric sign +-1 from the top bit.
inline double rademacher(std::uint64_t u) { return (u >> 63) ? 1.0 : -1.0; }

}  // namespace nlshom::rng

#pragma once

#include <cstdint>
#include <random>

namespace rqbc {

using Rng = std::mt19937_64;

// Seed used when the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 0xB1C0FFEEull;

// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mixSeed(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mixSeed(mixSeed(base) ^ mixSeed(stream + 0x632BE59BD9B4E019ull));
}

inline Rng makeRng(std::uint64_t base, std::uint64_t stream) {
  return Rng(deriveSeed(base, stream));
}

// Uniform in [0, 1) with 53 random bits. Written out rather than using
// std::uniform_real_distribution so that streams are identical across
// standard library implementations.
inline double uniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniformUnit(rng) < p; }

inline std::uint8_t randomBit(Rng& rng) { return static_cast<std::uint8_t>(rng() >> 63); }

}  // namespace rqbc

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qnet {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from a base seed and a sequence of labels, e.g.
/// deriveSeed(base, {n, replication}). Order-sensitive.
constexpr std::uint64_t deriveSeed(std::uint64_t base,
                                   std::initializer_list<std::uint64_t> labels) noexcept {
  std::uint64_t h = mix64(base);
  for (auto label : labels) h = mix64(h ^ mix64(label + 0x632be59bd9b4e019ULL));
  return h;
}

/// Uniform draw in the open interval (0, 1).
inline double uniformOpen(Rng& rng) {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace qnet

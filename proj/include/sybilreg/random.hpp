#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sybilreg {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for an independent substream identified by a path of integers, e.g.
/// {seed, replication, estimator, resample}. Streams depend only on the path,
/// never on the order in which they are requested.
constexpr std::uint64_t substream_seed(std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t v : path) h = mix64(h ^ mix64(v));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::initializer_list<std::uint64_t> path) {
  return Engine(substream_seed(path));
}

/// Uniform draw on [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace sybilreg

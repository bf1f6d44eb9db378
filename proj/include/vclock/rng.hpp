#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace vclock {

using Engine = std::mt19937_64;

// splitmix64 finaliser
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a key path (master seed, path index, purpose tag, ...) into one engine seed.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto k : keys) h = mix64(h ^ mix64(k));
  return h;
}

inline Engine make_engine(std::initializer_list<std::uint64_t> keys) { return Engine(derive_seed(keys)); }

// Purpose tags keep streams for different uses disjoint.
enum StreamTag : std::uint64_t {
  kTagClockCoarse = 1,
  kTagClockCell = 2,
  kTagBridgeMax = 3,
  kTagEuler = 4,
  kTagExact = 5,
  kTagMisc = 6,
};

}  // namespace vclock

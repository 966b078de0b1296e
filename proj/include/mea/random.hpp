#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mea {

using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche for deriving child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of a seed with a tuple of indices.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = mix64(seed);
  for (auto p : parts) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags so that each consumer of a drop seed gets an independent stream.
enum class Stream : std::uint64_t {
  kGeometry = 1,
  kUes = 2,
  kTraining = 3,
  kTTest = 4,
  kSufficiency = 5,
  kReference = 6,
};

inline Rng make_rng(std::uint64_t seed, Stream s, std::uint64_t sub = 0) {
  return Rng(derive_seed(seed, {static_cast<std::uint64_t>(s), sub}));
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace mea

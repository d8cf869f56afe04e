#pragma once

#include <cstdint>
#include <random>

namespace holo {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator for (seed, stream, substream). Streams are keyed by
// counters rather than by draw order, so parallel work split by row, block or
// resample reproduces the serial result exactly.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t sub = 0) noexcept {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (stream * 0xd1342543de82ef95ULL));
  k = splitmix64(k ^ (sub * 0x2545f4914f6cdd1dULL + 0x632be59bd9b4e019ULL));
  return std::mt19937_64(k);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Stream tags used across modules.
namespace streams {
constexpr std::uint64_t kCounts = 1;
constexpr std::uint64_t kJitter = 2;
constexpr std::uint64_t kDark = 3;
constexpr std::uint64_t kAccidental = 4;
constexpr std::uint64_t kInterleave = 5;
constexpr std::uint64_t kGain = 6;
constexpr std::uint64_t kBootstrap = 7;
constexpr std::uint64_t kBootstrapRef = 8;
}  // namespace streams

}  // namespace holo

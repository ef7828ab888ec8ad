#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace jitai {

// All randomness flows through explicitly seeded mt19937_64 streams. A trial
// derives one independent substream per consumer, so toggling the LLM filter
// on or off cannot shift the environment's random sequence.
using Rng = std::mt19937_64;

enum class Stream : std::uint64_t {
  Env = 1,
  Walk = 2,
  Thompson = 3,
  Oracle = 4,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Substream fully determined by (seed, stream).
inline Rng make_stream(std::uint64_t seed, Stream stream) {
  std::uint64_t chain = seed ^ (static_cast<std::uint64_t>(stream) * 0xbf58476d1ce4e5b9ull);
  const std::uint64_t a = detail::splitmix64(chain);
  const std::uint64_t b = detail::splitmix64(chain);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

// FNV-1a, stable across platforms; used for audit-log prompt digests.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace jitai

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mbdsim {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;

/// FNV-1a running hash; feed chunks, keep the returned state.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = kFnvOffsetBasis) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ull;
  }
  return state;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Decorrelated seed for a named substream of a root seed. Streams drawn for
/// different (tag, index) pairs never alias, which is what keeps CAM-side
/// randomness untouched when CPM features toggle on and off.
inline std::uint64_t stream_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ fnv1a(tag)) ^ index);
}

inline std::mt19937_64 make_stream(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
  return std::mt19937_64(stream_seed(root, tag, index));
}

}  // namespace mbdsim

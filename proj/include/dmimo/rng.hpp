#pragma once

#include <cstdint>
#include <random>

namespace dmimo {

// splitmix64; used to derive independent per-frame streams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream));
}

// Stream seed for frame `frame_index` of a run with `master_seed`.
// Sampling a frame never depends on how many frames were drawn before it.
inline std::mt19937_64 frame_rng(std::uint64_t master_seed,
                                 std::uint64_t frame_index,
                                 std::uint64_t salt = 0) {
  return std::mt19937_64(mix_seed(mix_seed(master_seed, frame_index), salt));
}

}  // namespace dmimo

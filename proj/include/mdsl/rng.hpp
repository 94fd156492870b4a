#pragma once

#include <cstdint>
#include <random>

namespace mdsl {

// Stream tags keep unrelated random draws on disjoint streams even when they
// share the experiment seed and round/worker indices.
namespace rng_tag {
inline constexpr std::uint64_t kBlobs = 0x01;
inline constexpr std::uint64_t kDirichlet = 0x02;
inline constexpr std::uint64_t kEvalSet = 0x03;
inline constexpr std::uint64_t kParamInit = 0x04;
inline constexpr std::uint64_t kCoefficients = 0x05;
inline constexpr std::uint64_t kMinibatch = 0x06;
inline constexpr std::uint64_t kFitSplit = 0x07;
inline constexpr std::uint64_t kLipschitz = 0x08;
inline constexpr std::uint64_t kPsoScale = 0x09;
}  // namespace rng_tag

// SplitMix64 finalizer; good avalanche for deriving stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a) {
  return mix64(mix64(seed) ^ a);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b) {
  return mix64(stream_key(seed, a) ^ mix64(b));
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b, std::uint64_t c) {
  return mix64(stream_key(seed, a, b) ^ mix64(c + 0x51ed2701ULL));
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b, std::uint64_t c,
                                std::uint64_t d) {
  return mix64(stream_key(seed, a, b, c) ^ mix64(d + 0x2c9277b5ULL));
}

// Counter-based engine construction: each (seed, tags...) tuple opens an
// independent deterministic stream, so results do not depend on the order
// in which concurrent workers draw.
template <typename... Tags>
std::mt19937_64 make_engine(std::uint64_t seed, Tags... tags) {
  return std::mt19937_64(stream_key(seed, static_cast<std::uint64_t>(tags)...));
}

}  // namespace mdsl

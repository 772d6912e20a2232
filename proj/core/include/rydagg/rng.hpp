#pragma once

#include <cstdint>
#include <random>

namespace rydagg {

/// Independent per-trajectory random streams from one root seed.
/// Stream (trajectory, purpose) depends only on those two numbers, never on
/// which worker runs it or in which order.
enum class StreamPurpose : std::uint64_t { initial_conditions = 1, hopping = 2 };

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t root, std::uint64_t trajectory,
                                    StreamPurpose purpose) {
  return splitmix64(splitmix64(root ^ splitmix64(trajectory)) +
                    static_cast<std::uint64_t>(purpose));
}

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t root, std::uint64_t trajectory, StreamPurpose purpose) {
  return Engine(stream_seed(root, trajectory, purpose));
}

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace rydagg

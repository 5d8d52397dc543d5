#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lsh {

using NodeId = std::uint32_t;
using ClusterId = std::uint32_t;
using ActionId = std::uint32_t;
/// Opaque environment state descriptor; each environment defines its own encoding.
using State = std::uint64_t;
using Rng = std::mt19937_64;

inline constexpr NodeId kNoNode = ~NodeId{0};
inline constexpr ClusterId kNoCluster = ~ClusterId{0};

/// Raised for invalid inputs and configurations (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mixes a base seed with a stream index (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace lsh

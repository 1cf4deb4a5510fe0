#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "ecl/math.hpp"

namespace ecl {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Seedable stream with draws that are bit-identical across platforms:
/// uniforms come from the (standard-specified) mt19937_64 and normals go
/// through the inverse CDF rather than the implementation-defined
/// std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// uniform on the open interval (0, 1); never returns an endpoint
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_quantile(uniform()); }

  /// integer in [0, n)
  std::uint64_t index(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return r < n ? r : n - 1;
  }

 private:
  std::mt19937_64 gen_;
};

/// Derives an independent substream from a master seed and a path of
/// indices (repetition, stage, purpose, ...). Equal paths give equal
/// streams; parallel runs that partition work by path reproduce serial
/// runs exactly.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t p : path) s = mix64(s ^ mix64(p));
  return s;
}

inline Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

// substream purpose tags
namespace stream {
inline constexpr std::uint64_t kInitialDesign = 1;
inline constexpr std::uint64_t kFit = 2;
inline constexpr std::uint64_t kAcquire = 3;
inline constexpr std::uint64_t kSurrogateSamples = 4;
inline constexpr std::uint64_t kBiasFit = 5;
inline constexpr std::uint64_t kBiasSamples = 6;
inline constexpr std::uint64_t kTestDesign = 7;
inline constexpr std::uint64_t kCandidatePool = 8;
}  // namespace stream

}  // namespace ecl

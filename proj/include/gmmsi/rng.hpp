#pragma once

#include <cstdint>
#include <random>

#include "gmmsi/types.hpp"

namespace gmmsi::rng {

/// Tags separating the independent random streams used by the library.
enum class Domain : std::uint64_t {
  kSample = 0x5a11,
  kLabel = 0x1abe1,
  kSignal = 0x5197a1,
  kKernel = 0x6e27e1,
  kNoise = 0x7015e,
  kModel = 0x30de1,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key for the stream identified by (seed, domain, index, sub). Distinct
/// tuples give statistically independent streams, so work items can be
/// generated in any order.
constexpr std::uint64_t stream_key(std::uint64_t seed, Domain domain,
                                   std::uint64_t index,
                                   std::uint64_t sub = 0) noexcept {
  std::uint64_t h = mix(seed);
  h = mix(h ^ static_cast<std::uint64_t>(domain));
  h = mix(h ^ index);
  return mix(h ^ sub);
}

/// Deterministic generator for one stream. The engine output is fixed by the
/// standard; the uniform and normal transforms are done here so that draws do
/// not depend on the standard library's distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : engine_(key) {}
  Stream(std::uint64_t seed, Domain domain, std::uint64_t index,
         std::uint64_t sub = 0)
      : engine_(stream_key(seed, domain, index, sub)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller).
  double normal();

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gmmsi::rng

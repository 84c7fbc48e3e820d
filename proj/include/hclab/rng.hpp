#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace hclab {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
/// Pure function of (counter, key): any stream position is addressable in O(1).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to fold coordinates and labels into 64-bit keys.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable 64-bit hash of a label (FNV-1a followed by mix64).
std::uint64_t hash_label(std::string_view label);

/// Derive the stream id for replica `index` of the stream family `label`.
std::uint64_t derive_stream(std::string_view label, std::uint64_t index);

/// Map 64 random bits to a double in the open interval (0, 1).
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// A single reproducible random stream: key = seed, counter = (position, stream).
///
/// Two streams with different (seed, stream) pairs never share counters, so
/// replicas can be generated in any order (or in parallel) with identical results.
/// Normal and exponential variates are produced by explicit transforms so the
/// output does not depend on the standard library implementation.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on (0, 1).
  double uniform();
  /// Standard normal (Box-Muller, both variates used).
  double normal();
  /// Exponential with the given rate.
  double exponential(double rate = 1.0);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// One uniform (0,1) value addressed by (seed, key_a, key_b); used for edge-keyed laws.
double keyed_uniform(std::uint64_t seed, std::uint64_t key_a, std::uint64_t key_b);

}  // namespace hclab

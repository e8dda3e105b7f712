#pragma once

#include <cstdint>
#include <random>

namespace fdf::synth {

/// splitmix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of an independent stream, derived from the master seed and the
/// (setting, replication, stream) coordinates:
///   mix64(mix64(mix64(mix64(master) ^ setting) ^ replication) ^ stream)
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t setting,
                                    std::uint64_t replication, std::uint64_t stream = 0) {
  return mix64(mix64(mix64(mix64(master) ^ setting) ^ replication) ^ stream);
}

/// Standard normal variates from a 64-bit Mersenne Twister via the
/// Marsaglia polar method. Both pieces are fully specified, so a seed gives
/// the same sequence on every platform (unlike std::normal_distribution).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fdf::synth

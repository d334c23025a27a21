#ifndef ORDQR_RANDOM_HPP
#define ORDQR_RANDOM_HPP

#include <cstdint>
#include <random>

namespace ordqr {

/// Single-owner random stream.
///
/// Only the 64-bit Mersenne Twister engine is taken from the standard
/// library; every variate is built on top of its raw output so that draw
/// sequences are identical across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for (seed, stream, substream). Used to give each
  /// chain and each replication its own generator.
  static Rng substream(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t sub = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse CDF.
  double normal();

  /// Standard exponential.
  double exponential();

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// 64-bit seed for (seed, stream, sub); Rng::substream seeds from this.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub = 0);

}  // namespace ordqr

#endif  // ORDQR_RANDOM_HPP

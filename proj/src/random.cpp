#include "ordqr/random.hpp"

#include <cmath>

#include "ordqr/distributions.hpp"

namespace ordqr {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(a);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded_engine(seed)) {}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (stream * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
  return mix64(h ^ (sub * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub) {
  return Rng(derive_seed(seed, stream, sub));
}

double Rng::normal() { return normal_quantile(uniform()); }

double Rng::exponential() { return -std::log(uniform()); }

}  // namespace ordqr

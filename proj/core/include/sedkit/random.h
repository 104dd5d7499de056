#pragma once

#include <cstdint>
#include <random>

namespace sedkit {

// All randomness in the library flows through explicitly seeded generators of
// this type. There is no global or wall-clock entropy.
using Rng = std::mt19937_64;

// SplitMix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream `stream` of a root seed. Used to give every clip or
// bootstrap iteration its own generator so results do not depend on the
// processing order or thread count.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix_seed(seed)); }

// Beta(alpha, alpha) draw via two gamma variates.
inline double sample_symmetric_beta(Rng& rng, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  if (x + y <= 0.0) return 0.5;
  return x / (x + y);
}

}  // namespace sedkit

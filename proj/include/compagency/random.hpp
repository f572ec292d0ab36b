#ifndef COMPAGENCY_RANDOM_HPP_
#define COMPAGENCY_RANDOM_HPP_

// Seeded, splittable randomness. Distributions are implemented here rather
// than taken from <random> because the standard leaves their algorithms
// implementation-defined, and reports must be byte-identical across
// toolchains for a given seed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <vector>

#include "compagency/core.hpp"

namespace compagency {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = splitmix64(s);
      w = s;
    }
  }

  /// Independent stream keyed by (seed, path...). Used to give every sample
  /// its own generator regardless of evaluation order.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t key = splitmix64(seed);
    for (std::uint64_t p : path) key = splitmix64(key ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return Rng(key);
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::size_t index(std::size_t lo, std::size_t hi) noexcept {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  /// Standard normal by Box-Muller (one draw per call, the sine branch is
  /// discarded so the stream position stays simple).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

inline std::vector<double> normal_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> out(n);
  for (double& v : out) v = scale * rng.normal();
  return out;
}

/// Strictly positive belief with log-masses spread ~ N(0, spread^2).
inline Dist random_dist(Rng& rng, const OutcomeSpace& space, double spread = 1.0) {
  return Dist::from_logits(space, normal_vector(rng, space.size(), spread));
}

/// Weights with every entry >= floor: floor + (1 - n*floor) * u / sum(u).
inline Weights floored_weights(Rng& rng, std::size_t n, double floor) {
  require(floor >= 0.0 && static_cast<double>(n) * floor < 1.0, ErrorKind::ParamOutOfRange,
          "weight floor too large for the number of agents");
  std::vector<double> u(n);
  double total = 0.0;
  for (double& v : u) {
    v = rng.uniform(1e-3, 1.0);
    total += v;
  }
  const double free = 1.0 - static_cast<double>(n) * floor;
  for (double& v : u) v = floor + free * v / total;
  return Weights::normalized(u);
}

}  // namespace compagency

#endif  // COMPAGENCY_RANDOM_HPP_
